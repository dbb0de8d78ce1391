//! Sampling functionals and their reduction to raw measurements.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::KernelExpr;
use crate::error::{GopError, Result};
use crate::families::{EigenFamily, SparseExpansion};
use crate::numkit::{integrate, QuadratureSpec};
use crate::operators::IterationAction;

/// Anything functionals can be applied to.
pub trait Signal {
    fn value(&self, x: f64) -> Result<Complex64>;

    fn derivative(&self, x: f64, order: usize) -> Result<Complex64> {
        if order == 0 {
            self.value(x)
        } else {
            Err(GopError::Unsupported("derivative values of a black-box signal".into()))
        }
    }
}

impl Signal for SparseExpansion {
    fn value(&self, x: f64) -> Result<Complex64> {
        self.eval(x)
    }

    fn derivative(&self, x: f64, order: usize) -> Result<Complex64> {
        self.eval_derivative(x, order)
    }
}

/// Wraps a closure as a signal that only offers function values.
pub struct FnSignal<F>(pub F);

impl<F: Fn(f64) -> Complex64> Signal for FnSignal<F> {
    fn value(&self, x: f64) -> Result<Complex64> {
        Ok((self.0)(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplingFunctional {
    PointEval { x: f64 },
    DeltaDerivative { x: f64, order: usize },
    WeightedPoints { points: Vec<(f64, Complex64)> },
    MomentKernel { kernel: KernelExpr, quad: QuadratureSpec },
    /// `F(g) = base(action^power g)`
    Composed {
        action: IterationAction,
        power: usize,
        base: Box<SamplingFunctional>,
    },
}

impl SamplingFunctional {
    pub fn point(x: f64) -> Self {
        SamplingFunctional::PointEval { x }
    }

    pub fn moment(kernel: KernelExpr) -> Self {
        SamplingFunctional::MomentKernel {
            kernel,
            quad: QuadratureSpec::default(),
        }
    }

    /// `self ∘ action^power`
    pub fn after(self, action: IterationAction, power: usize) -> Self {
        SamplingFunctional::Composed {
            action,
            power,
            base: Box::new(self),
        }
    }

    /// Innermost base functional and the actions applied before it,
    /// ordered from the one adjacent to the base outward to `f`.
    pub fn flatten(&self) -> (&SamplingFunctional, Vec<(&IterationAction, usize)>) {
        match self {
            SamplingFunctional::Composed { action, power, base } => {
                let (root, mut ops) = base.flatten();
                ops.push((action, *power));
                (root, ops)
            }
            other => (other, Vec::new()),
        }
    }
}

/// How polynomial moment kernels are turned into raw data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentEncoding {
    /// One measurement `∫ f φ` per distinct kernel.
    #[default]
    Kernel,
    /// Monomial moments `∫_0^len f(a + u) u^s du`, when the kernel is a polynomial.
    Monomial,
}

/// One acquired number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RawMeasurement {
    /// `f^{(order)}(x)`
    Point { x: f64, order: usize },
    /// `∫ f φ`
    Kernel { kernel: KernelExpr, quad: QuadratureSpec },
    /// `∫_0^len f(start + u) u^power du`
    Monomial {
        start: f64,
        len: f64,
        power: usize,
        quad: QuadratureSpec,
    },
}

impl RawMeasurement {
    pub fn id(&self) -> String {
        match self {
            RawMeasurement::Point { x, order } => format!("pt:d{order}:x{x:?}"),
            RawMeasurement::Kernel { kernel, .. } => kernel.id(),
            RawMeasurement::Monomial { start, len, power, .. } => format!("mom:a{start:?}:l{len:?}:s{power}"),
        }
    }

    /// Interval of the signal's domain this measurement touches.
    pub fn footprint(&self) -> (f64, f64) {
        match self {
            RawMeasurement::Point { x, .. } => (*x, *x),
            RawMeasurement::Kernel { kernel, .. } => kernel.support(),
            RawMeasurement::Monomial { start, len, .. } => (*start, start + len),
        }
    }

    pub fn evaluate(&self, f: &dyn Signal) -> Result<Complex64> {
        let guarded = |x: f64| f.value(x).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        match self {
            RawMeasurement::Point { x, order } => f.derivative(*x, *order),
            RawMeasurement::Kernel { kernel, quad } => kernel.moment(guarded, quad),
            RawMeasurement::Monomial { start, len, power, quad } => integrate(
                |u| guarded(start + u) * u.powi(*power as i32),
                0.0,
                *len,
                quad,
            ),
        }
    }
}

/// Measured values keyed by measurement id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Measurements(BTreeMap<String, Complex64>);

impl Measurements {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, value: Complex64) {
        self.0.insert(id.into(), value);
    }

    pub fn get(&self, id: &str) -> Option<Complex64> {
        self.0.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Complex64)> {
        self.0.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Complex64)> {
        self.0.iter_mut()
    }
}

impl FromIterator<(String, Complex64)> for Measurements {
    fn from_iter<I: IntoIterator<Item = (String, Complex64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// `Σ weight · raw[index]`
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearForm(pub Vec<(usize, Complex64)>);

impl LinearForm {
    fn push(&mut self, idx: usize, w: Complex64) {
        if let Some(e) = self.0.iter_mut().find(|e| e.0 == idx) {
            e.1 += w;
        } else {
            self.0.push((idx, w));
        }
    }

    fn normalized(mut self) -> Self {
        self.0.retain(|e| e.1 != Complex64::new(0.0, 0.0));
        self.0.sort_by_key(|e| e.0);
        self
    }

    pub fn eval(&self, raw: &[Complex64]) -> Complex64 {
        self.0.iter().map(|&(i, w)| w * raw[i]).sum()
    }

    /// Equal up to a relative tolerance on the weights.
    pub fn approx_eq(&self, other: &LinearForm) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| {
                a.0 == b.0 && (a.1 - b.1).norm() <= 1e-12 * a.1.norm().max(b.1.norm()).max(1e-300)
            })
    }
}

/// Deduplicating store of raw measurements.
#[derive(Debug, Clone, Default)]
pub(crate) struct Registry {
    pub raw: Vec<RawMeasurement>,
    by_id: HashMap<String, usize>,
}

impl Registry {
    fn point_index(&mut self, x: f64, order: usize) -> usize {
        let tol = 1e-12 * x.abs().max(1.0);
        if let Some(i) = self.raw.iter().position(|r| {
            matches!(r, RawMeasurement::Point { x: y, order: o } if *o == order && (y - x).abs() <= tol)
        }) {
            return i;
        }
        self.insert(RawMeasurement::Point { x, order })
    }

    fn insert(&mut self, r: RawMeasurement) -> usize {
        let id = r.id();
        if let Some(&i) = self.by_id.get(&id) {
            return i;
        }
        self.raw.push(r);
        self.by_id.insert(id, self.raw.len() - 1);
        self.raw.len() - 1
    }
}

struct PointState {
    x: f64,
    w: Complex64,
    order: usize,
}

struct KernelState {
    kernel: KernelExpr,
    w: Complex64,
    quad: QuadratureSpec,
}

fn unsupported(action: &IterationAction, what: &str) -> GopError {
    GopError::Unsupported(format!("{what} through {action:?}"))
}

fn push_point_action(states: Vec<PointState>, action: &IterationAction, power: usize) -> Result<Vec<PointState>> {
    let mut out = Vec::new();
    for s in states {
        if power == 0 {
            out.push(s);
            continue;
        }
        match action {
            IterationAction::PlainPower(op) => {
                let e = crate::operators::DiffOperator::nth_derivative(s.order).compose(&op.pow(power));
                for (n, w) in e.weights_at(s.x).into_iter().enumerate() {
                    if w != 0.0 {
                        out.push(PointState {
                            x: s.x,
                            w: s.w * w,
                            order: n,
                        });
                    }
                }
            }
            _ if s.order == 0 => {
                for g in action.grid_points(s.x, power)? {
                    out.push(PointState {
                        x: g.point,
                        w: s.w * g.weight,
                        order: g.order,
                    });
                }
            }
            IterationAction::HalfSumShift { .. } => {
                // translations commute with d/dx
                for g in action.grid_points(s.x, power)? {
                    out.push(PointState {
                        x: g.point,
                        w: s.w * g.weight,
                        order: s.order,
                    });
                }
            }
            IterationAction::Dilation { a } => {
                let ap = a.powi(power as i32);
                out.push(PointState {
                    x: ap * s.x,
                    w: s.w * ap.powi(s.order as i32),
                    order: s.order,
                });
            }
            _ => match action.as_translation(power) {
                Some((shift, w)) => out.push(PointState {
                    x: s.x + shift,
                    w: s.w * w,
                    order: s.order,
                }),
                None => return Err(unsupported(action, "derivative samples")),
            },
        }
    }
    Ok(out)
}

fn push_kernel_action(states: Vec<KernelState>, action: &IterationAction, power: usize) -> Result<Vec<KernelState>> {
    let mut out = Vec::new();
    for s in states {
        if power == 0 {
            out.push(s);
            continue;
        }
        match action {
            IterationAction::PlainPower(op) => {
                let mut k = s.kernel;
                for _ in 0..power {
                    k = k.adjoint_apply(op)?;
                }
                out.push(KernelState {
                    kernel: k,
                    w: s.w,
                    quad: s.quad,
                });
            }
            IterationAction::HalfSumShift { tau } => {
                let scale = 0.5f64.powi(power as i32);
                for r in 0..=power {
                    let b = (0..r).fold(1.0, |b, i| b * (power - i) as f64 / (i + 1) as f64);
                    out.push(KernelState {
                        kernel: s.kernel.translate((power as f64 - 2.0 * r as f64) * tau),
                        w: s.w * scale * b,
                        quad: s.quad,
                    });
                }
            }
            IterationAction::Dilation { a } => {
                let ap = a.powi(power as i32);
                out.push(KernelState {
                    kernel: s.kernel.dilate(ap)?,
                    w: s.w / ap,
                    quad: s.quad,
                });
            }
            _ => match action.as_translation(power) {
                Some((shift, w)) => out.push(KernelState {
                    kernel: s.kernel.translate(shift),
                    w: s.w * w,
                    quad: s.quad,
                }),
                None => return Err(unsupported(action, "moment kernels")),
            },
        }
    }
    Ok(out)
}

/// Reduces `F(extra^extra_power f)` to a linear form over raw measurements.
pub(crate) fn expand(
    functional: &SamplingFunctional,
    extra: Option<(&IterationAction, usize)>,
    family: &EigenFamily,
    encoding: MomentEncoding,
    registry: &mut Registry,
) -> Result<LinearForm> {
    let (base, mut ops) = functional.flatten();
    if let Some(e) = extra {
        ops.push(e);
    }
    let mut form = LinearForm::default();
    let one = Complex64::new(1.0, 0.0);
    match base {
        SamplingFunctional::MomentKernel { kernel, quad } => {
            let mut states = vec![KernelState {
                kernel: kernel.clone(),
                w: one,
                quad: *quad,
            }];
            for (action, power) in ops {
                states = push_kernel_action(states, action, power)?;
            }
            for s in states {
                let (a, b) = s.kernel.support();
                let dom = family.domain();
                if !(dom.contains(a) && dom.contains(b)) {
                    return Err(GopError::DomainEscape(format!(
                        "kernel support [{a}, {b}] leaves the domain {dom}"
                    )));
                }
                if s.kernel.is_zero() {
                    continue;
                }
                match (encoding, s.kernel.monomial_weights()) {
                    (MomentEncoding::Monomial, Some(ws)) => {
                        for (power, w) in ws.into_iter().enumerate() {
                            if w == 0.0 {
                                continue;
                            }
                            let idx = registry.insert(RawMeasurement::Monomial {
                                start: a,
                                len: b - a,
                                power,
                                quad: s.quad,
                            });
                            form.push(idx, s.w * w);
                        }
                    }
                    _ => {
                        let idx = registry.insert(RawMeasurement::Kernel {
                            kernel: s.kernel,
                            quad: s.quad,
                        });
                        form.push(idx, s.w);
                    }
                }
            }
        }
        SamplingFunctional::Composed { .. } => unreachable!("flatten strips compositions"),
        _ => {
            let mut states = match base {
                SamplingFunctional::PointEval { x } => vec![PointState { x: *x, w: one, order: 0 }],
                SamplingFunctional::DeltaDerivative { x, order } => vec![PointState {
                    x: *x,
                    w: one,
                    order: *order,
                }],
                SamplingFunctional::WeightedPoints { points } => points
                    .iter()
                    .map(|&(x, w)| PointState { x, w, order: 0 })
                    .collect(),
                _ => unreachable!(),
            };
            for (action, power) in ops {
                states = push_point_action(states, action, power)?;
            }
            for s in states {
                family.check_point(s.x).map_err(|_| {
                    GopError::DomainEscape(format!(
                        "sample point {} leaves the domain {}",
                        s.x,
                        family.domain()
                    ))
                })?;
                let (x, w) = if family.is_even() && s.x < 0.0 {
                    let sign = if s.order % 2 == 0 { 1.0 } else { -1.0 };
                    (-s.x, s.w * sign)
                } else {
                    (s.x, s.w)
                };
                let idx = registry.point_index(x, s.order);
                form.push(idx, w);
            }
        }
    }
    Ok(form.normalized())
}

/// `F(f)` evaluated directly on a signal.
pub fn apply_functional(functional: &SamplingFunctional, family: &EigenFamily, f: &dyn Signal) -> Result<Complex64> {
    let mut reg = Registry::default();
    let form = expand(functional, None, family, MomentEncoding::Kernel, &mut reg)?;
    let raw = reg.raw.iter().map(|r| r.evaluate(f)).collect::<Result<Vec<_>>>()?;
    Ok(form.eval(&raw))
}
