//! Function families the operators act on. Each family carries, besides
//! pointwise evaluation, the analytic data the quadratures need: directional
//! first and second derivatives for near-field Taylor cores, a coarse local
//! fourth-derivative bound, a far-field certificate for tail handling, a
//! feature scale, and the radii at which smoothness breaks along rays.

use std::sync::Arc;

use serde::Serialize;

use crate::closed_forms::{torsion_coefficient, ClosedForm};
use crate::error::{FracError, FracResult};
use crate::special::{gamma_unchecked, FracParams, PI, TWO_PI};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sigma_n1(n: u32) -> f64 {
    2.0 * PI.powf(0.5 * n as f64) / gamma_unchecked(0.5 * n as f64)
}

// ---------------------------------------------------------------- estimates

/// A computed value together with a conservative absolute error bound
/// assembled from analytic tail estimates, Taylor-core truncation, and
/// quadrature refinement differences.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub bound: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, bound: 0.0 }
    }
}

// ------------------------------------------------------------- quadrature

/// Discretization parameters shared by the quadrature-backed operators.
/// `delta` splits the near field from the intermediate annulus, `trunc` is
/// the truncation radius R of the annulus, `t_split` the semigroup time
/// split. Defaults: delta = 0.1 (callers rescale by the feature size via
/// `for_scale`), trunc = 40, 40/40 radial nodes, 32 angular nodes,
/// tol_abs = tol_rel = 1e-2, t_split = 1.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadratureSpec {
    pub delta: f64,
    pub trunc: f64,
    pub nodes_near: usize,
    pub nodes_far: usize,
    pub nodes_angular: usize,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub t_split: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            delta: 0.1,
            trunc: 40.0,
            nodes_near: 40,
            nodes_far: 40,
            nodes_angular: 32,
            tol_abs: 1e-2,
            tol_rel: 1e-2,
            t_split: 1.0,
        }
    }
}

impl QuadratureSpec {
    /// Default spec with the near-field split scaled to a function's
    /// feature size.
    pub fn for_scale(scale: f64) -> Self {
        QuadratureSpec { delta: 0.1 * scale.max(1e-6), ..Default::default() }
    }

    /// Tightened absolute tolerance, keeping everything else.
    pub fn with_tol(mut self, tol_abs: f64) -> Self {
        self.tol_abs = tol_abs;
        self
    }

    pub fn validate(&self) -> FracResult<()> {
        if !(self.delta > 0.0 && self.delta < self.trunc) {
            return Err(FracError::Grid(format!(
                "need 0 < delta < trunc, got delta = {}, trunc = {}",
                self.delta, self.trunc
            )));
        }
        if self.nodes_near < 8 || self.nodes_far < 8 || self.nodes_angular < 8 {
            return Err(FracError::Grid("node counts must be at least 8".into()));
        }
        for (name, t) in [("tol_abs", self.tol_abs), ("tol_rel", self.tol_rel)] {
            if !(t > 0.0 && t <= 1e-2) {
                return Err(FracError::Grid(format!("{name} must lie in (0, 1e-2], got {t}")));
            }
        }
        if self.t_split <= 0.0 {
            return Err(FracError::Grid("t_split must be positive".into()));
        }
        Ok(())
    }
}

// ------------------------------------------------------------ sampled data

/// Uniform grid samples on the box [-L, L]^n with N points per axis
/// (power of two, at least 16), x_i = -L + 2L i/N. The +L face is excluded,
/// matching the periodic identification used by the spectral operator.
#[derive(Clone, Debug)]
pub struct SampledField {
    pub n: u32,
    pub half_width: f64,
    pub points: usize,
    pub periodic: bool,
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn new(
        n: u32,
        half_width: f64,
        points: usize,
        periodic: bool,
        values: Vec<f64>,
    ) -> FracResult<Self> {
        if !(1..=3).contains(&n) {
            return Err(FracError::Grid(format!("sampled fields support n in 1..=3, got {n}")));
        }
        if half_width <= 0.0 {
            return Err(FracError::Grid("box half-width must be positive".into()));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(FracError::Grid(format!(
                "points per axis must be a power of two >= 16, got {points}"
            )));
        }
        let want = points.pow(n);
        if values.len() != want {
            return Err(FracError::Grid(format!(
                "value buffer holds {} entries, grid needs {want}",
                values.len()
            )));
        }
        Ok(SampledField { n, half_width, points, periodic, values })
    }

    pub fn from_function(
        u: impl Fn(&[f64]) -> f64,
        n: u32,
        half_width: f64,
        points: usize,
        periodic: bool,
    ) -> FracResult<Self> {
        let mut field = SampledField::new(n, half_width, points, periodic, vec![0.0; points.pow(n)])?;
        let step = 2.0 * half_width / points as f64;
        let mut x = [0.0f64; 3];
        for flat in 0..field.values.len() {
            let mut rest = flat;
            for ax in (0..n as usize).rev() {
                let i = rest % points;
                rest /= points;
                x[ax] = -half_width + step * i as f64;
            }
            field.values[flat] = u(&x[..n as usize]);
        }
        Ok(field)
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Flat index of a multi-index (axis 0 slowest).
    pub fn idx(&self, ix: &[usize]) -> usize {
        ix.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Multilinear interpolation; periodic fields wrap, non-periodic fields
    /// extend by zero outside the box (callers gate on `FunctionSpec::
    /// check_ball` before integrating there).
    pub fn eval(&self, x: &[f64]) -> f64 {
        let nn = self.n as usize;
        let np = self.points;
        let step = self.step();
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for ax in 0..nn {
            let mut t = (x[ax] + self.half_width) / step;
            if self.periodic {
                t = t.rem_euclid(np as f64);
            } else if !(-1.0..=(np as f64)).contains(&t) {
                return 0.0;
            }
            let i = t.floor();
            base[ax] = ((i as i64).rem_euclid(np as i64)) as usize;
            frac[ax] = t - i;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << nn) {
            let mut w = 1.0;
            let mut ix = [0usize; 3];
            let mut skip = false;
            for ax in 0..nn {
                let hi = corner >> ax & 1 == 1;
                w *= if hi { frac[ax] } else { 1.0 - frac[ax] };
                let raw = base[ax] as i64 + hi as i64;
                if self.periodic {
                    ix[ax] = (raw.rem_euclid(np as i64)) as usize;
                } else if raw < 0 || raw >= np as i64 {
                    skip = true; // zero extension
                } else {
                    ix[ax] = raw as usize;
                }
            }
            if !skip && w != 0.0 {
                acc += w * self.values[self.idx(&ix[..nn])];
            }
        }
        acc
    }
}

// -------------------------------------------------------------- far fields

/// Certificate describing a family beyond any bounded set; drives analytic
/// tail terms and the reported remainder bounds of the evaluators.
#[derive(Clone, Debug)]
pub enum FarField {
    /// |u(z)| <= amp exp(-pi (|z|-shift)^2 / width^2) whenever |z| >= shift.
    SuperExp { amp: f64, width: f64, shift: f64 },
    /// |u(z)| <= coeff |z|^{-exponent} whenever |z| >= from.
    Power { coeff: f64, exponent: f64, from: f64 },
    /// u(z) = 0 whenever |z| >= radius.
    Compact { radius: f64 },
    /// u(z) = value identically outside every ball (constants).
    Limit { value: f64 },
    /// Bounded oscillation, |u| <= amp, mean zero along rays.
    Oscillatory { amp: f64 },
    /// Only a sup bound is known.
    Bounded { sup: f64 },
}

impl FarField {
    /// Sup of |u| on {|z| >= r} implied by the certificate.
    pub fn sup_beyond(&self, r: f64) -> f64 {
        match *self {
            FarField::SuperExp { amp, width, shift } => {
                let d = (r - shift).max(0.0);
                amp * (-PI * d * d / (width * width)).exp()
            }
            FarField::Power { coeff, exponent, from } => {
                coeff * r.max(from).powf(-exponent)
            }
            FarField::Compact { radius } => {
                if r >= radius {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            FarField::Limit { value } => value.abs(),
            FarField::Oscillatory { amp } => amp,
            FarField::Bounded { sup } => sup,
        }
    }
}

// ---------------------------------------------------------------- families

/// Metadata a caller must supply alongside a raw closure, since nothing can
/// be inferred from it.
#[derive(Clone)]
pub struct ClosureMeta {
    pub scale: f64,
    pub sup: f64,
    pub far: FarField,
}

#[derive(Clone)]
enum Family {
    Gaussian { center: Vec<f64>, width: f64 },
    Bump { center: Vec<f64>, inner: f64, outer: f64 },
    Cosine { wave: Vec<f64>, amp: f64 },
    Closed { form: ClosedForm, params: FracParams },
    Sampled { field: Arc<SampledField> },
    Closure { f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>, meta: ClosureMeta },
}

/// A scalar function on R^n from one of the built-in families.
#[derive(Clone)]
pub struct FunctionSpec {
    pub n: u32,
    family: Family,
}

impl std::fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.family {
            Family::Gaussian { center, width } => {
                write!(f, "gaussian(center={center:?}, width={width})")
            }
            Family::Bump { center, inner, outer } => {
                write!(f, "bump(center={center:?}, inner={inner}, outer={outer})")
            }
            Family::Cosine { wave, amp } => write!(f, "cosine(wave={wave:?}, amp={amp})"),
            Family::Closed { form, params } => write!(f, "closed({form:?}, {params:?})"),
            Family::Sampled { field } => write!(
                f,
                "sampled(n={}, L={}, N={}, periodic={})",
                field.n, field.half_width, field.points, field.periodic
            ),
            Family::Closure { meta, .. } => {
                write!(f, "closure(scale={}, sup={})", meta.scale, meta.sup)
            }
        }
    }
}

/// Radial closed forms are all coef (m^2 + r^2)^{-beta}; this resolves the
/// three parameters, with None for forms that are not of that shape.
fn closed_radial_shape(form: &ClosedForm, params: &FracParams) -> Option<(f64, f64, f64)> {
    match form {
        ClosedForm::RegularizedFundamental { y0 } => Some((
            y0 * y0,
            0.5 * (params.nf() - 2.0 * params.s),
            crate::closed_forms::alpha_ns(params).ok()?,
        )),
        ClosedForm::ExtensionPoisson { y0 } => Some((
            y0 * y0,
            0.5 * (params.nf() + 2.0 * params.s),
            gamma_unchecked(0.5 * params.nf() + params.s)
                / (PI.powf(0.5 * params.nf()) * gamma_unchecked(params.s))
                * y0.powf(2.0 * params.s),
        )),
        ClosedForm::Yamabe { y0 } => {
            let b = 0.5 * (params.nf() - 2.0 * params.s);
            let at0 = crate::closed_forms::yamabe_solution(
                &vec![0.0; params.n as usize],
                *y0,
                params,
            )
            .ok()?
            .value;
            // value = kappa y0^b (y0^2+r^2)^{-b} and at0 = kappa y0^{-b}
            Some((y0 * y0, b, at0 * y0.powf(2.0 * b)))
        }
        _ => None,
    }
}

/// Quintic cutoff q with q(0)=1, q(1)=0 and two vanishing derivatives at
/// both ends, so bump profiles are C^2 across the joins.
fn quintic(t: f64) -> f64 {
    1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

fn quintic_d1(t: f64) -> f64 {
    -30.0 * t * t * (1.0 - t) * (1.0 - t)
}

fn quintic_d2(t: f64) -> f64 {
    -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
}

impl FunctionSpec {
    pub fn gaussian(center: &[f64], width: f64) -> FracResult<Self> {
        if center.is_empty() || width <= 0.0 {
            return Err(FracError::Domain("gaussian needs a center and positive width".into()));
        }
        Ok(FunctionSpec {
            n: center.len() as u32,
            family: Family::Gaussian { center: center.to_vec(), width },
        })
    }

    pub fn bump(center: &[f64], inner: f64, outer: f64) -> FracResult<Self> {
        if center.is_empty() || !(0.0 < inner && inner < outer) {
            return Err(FracError::Domain("bump needs 0 < inner < outer".into()));
        }
        Ok(FunctionSpec {
            n: center.len() as u32,
            family: Family::Bump { center: center.to_vec(), inner, outer },
        })
    }

    pub fn cosine(wave: &[f64]) -> FracResult<Self> {
        Self::cosine_amp(wave, 1.0)
    }

    pub fn cosine_amp(wave: &[f64], amp: f64) -> FracResult<Self> {
        if wave.is_empty() {
            return Err(FracError::Domain("cosine needs a wavevector".into()));
        }
        Ok(FunctionSpec {
            n: wave.len() as u32,
            family: Family::Cosine { wave: wave.to_vec(), amp },
        })
    }

    /// The constant c, as the zero-wavevector cosine.
    pub fn constant(n: u32, c: f64) -> FracResult<Self> {
        Self::cosine_amp(&vec![0.0; n.max(1) as usize], c)
    }

    pub fn closed_form(form: ClosedForm, params: FracParams) -> FracResult<Self> {
        // reject inadmissible branches up front with a probe evaluation
        let probe = vec![0.73; params.n as usize];
        form.value(&probe, &params)?;
        Ok(FunctionSpec { n: params.n, family: Family::Closed { form, params } })
    }

    pub fn sampled(field: SampledField) -> Self {
        FunctionSpec { n: field.n, family: Family::Sampled { field: Arc::new(field) } }
    }

    pub fn closure(
        n: u32,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        meta: ClosureMeta,
    ) -> Self {
        FunctionSpec { n, family: Family::Closure { f: Arc::new(f), meta } }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n as usize);
        match &self.family {
            Family::Gaussian { center, width } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                (-PI * r2 / (width * width)).exp()
            }
            Family::Bump { center, inner, outer } => {
                let r = x
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if r <= *inner {
                    1.0
                } else if r >= *outer {
                    0.0
                } else {
                    quintic((r - inner) / (outer - inner))
                }
            }
            Family::Cosine { wave, amp } => amp * (TWO_PI * dot(wave, x)).cos(),
            Family::Closed { form, params } => form.value(x, params).unwrap_or(f64::INFINITY),
            Family::Sampled { field } => field.eval(x),
            Family::Closure { f, .. } => f(x),
        }
    }

    /// Directional derivative <grad u(x), dir> for the analytic families.
    pub fn gradient_dir(&self, x: &[f64], dir: &[f64]) -> Option<f64> {
        self.radial_chain(x, dir, false)
    }

    /// Second directional derivative dir^T D^2u(x) dir for the analytic
    /// families; None for sampled fields and closures.
    pub fn hessian_dir(&self, x: &[f64], dir: &[f64]) -> Option<f64> {
        self.radial_chain(x, dir, true)
    }

    /// d/dt or d^2/dt^2 of u(x + t dir) at t = 0 for families that are
    /// radial around a center or otherwise analytic.
    fn radial_chain(&self, x: &[f64], dir: &[f64], second: bool) -> Option<f64> {
        match &self.family {
            Family::Gaussian { center, width } => {
                let w2 = width * width;
                let u = self.value(x);
                let proj: f64 = x.iter().zip(center).zip(dir).map(|((a, c), d)| (a - c) * d).sum();
                if second {
                    Some(u * (4.0 * PI * PI * proj * proj / (w2 * w2) - TWO_PI / w2))
                } else {
                    Some(-TWO_PI / w2 * proj * u)
                }
            }
            Family::Cosine { wave, amp } => {
                let kd = TWO_PI * dot(wave, dir);
                let ph = TWO_PI * dot(wave, x);
                if second {
                    Some(-amp * kd * kd * ph.cos())
                } else {
                    Some(-amp * kd * ph.sin())
                }
            }
            Family::Bump { center, inner, outer } => {
                let rel: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let r = norm(&rel);
                let dr = outer - inner;
                let (f1, f2) = if r <= *inner || r >= *outer {
                    (0.0, 0.0)
                } else {
                    let t = (r - inner) / dr;
                    (quintic_d1(t) / dr, quintic_d2(t) / (dr * dr))
                };
                Some(self.directional_from_radial(&rel, r, dir, f1, f2, second))
            }
            Family::Closed { form, params } => {
                let (m2, beta, coef) = closed_radial_shape(form, params)?;
                // g(r) = coef (m2 + r^2)^{-beta}
                let rel = x.to_vec();
                let r = norm(&rel);
                let q = m2 + r * r;
                let f1 = -2.0 * beta * coef * r * q.powf(-beta - 1.0);
                let f2 = -2.0 * beta * coef
                    * (q.powf(-beta - 1.0) - 2.0 * (beta + 1.0) * r * r * q.powf(-beta - 2.0));
                Some(self.directional_from_radial(&rel, r, dir, f1, f2, second))
            }
            Family::Sampled { .. } | Family::Closure { .. } => None,
        }
    }

    fn directional_from_radial(
        &self,
        rel: &[f64],
        r: f64,
        dir: &[f64],
        f1: f64,
        f2: f64,
        second: bool,
    ) -> f64 {
        if r == 0.0 {
            return if second { f2 } else { 0.0 };
        }
        let c = dot(rel, dir) / r;
        if second {
            f2 * c * c + f1 / r * (1.0 - c * c)
        } else {
            f1 * c
        }
    }

    /// Trace of the Hessian for the analytic families.
    pub fn laplacian(&self, x: &[f64]) -> Option<f64> {
        let nn = self.n as usize;
        let mut acc = 0.0;
        let mut dir = vec![0.0; nn];
        for i in 0..nn {
            dir[i] = 1.0;
            acc += self.hessian_dir(x, &dir)?;
            dir[i] = 0.0;
        }
        Some(acc)
    }

    /// Coarse sup bound for fourth directional derivatives near x, used to
    /// bound the Taylor-core truncation of the near-field quadratures.
    pub fn fourth_local(&self, x: &[f64]) -> Option<f64> {
        match &self.family {
            Family::Gaussian { width, .. } => {
                Some(12.0 * PI * PI / width.powi(4))
            }
            Family::Cosine { wave, amp } => {
                let k = norm(wave);
                Some((amp.abs()) * (TWO_PI * k).powi(4))
            }
            Family::Bump { inner, outer, .. } => {
                Some(400.0 * self.n as f64 / (outer - inner).powi(4))
            }
            Family::Closed { form, params } => {
                let (m2, beta, coef) = closed_radial_shape(form, params)?;
                // |g''''| for g = coef (m2+r^2)^{-beta} is bounded by
                // 16 coef (beta+3)^4 (m2 + d^2)^{-beta-2} near radius d,
                // with cross terms absorbed in the factor 16
                let d = (norm(x) - 1.0).max(0.0);
                Some(16.0 * coef.abs() * (beta + 3.0).powi(4) * (m2 + d * d).powf(-beta - 2.0))
            }
            Family::Sampled { .. } | Family::Closure { .. } => None,
        }
    }

    /// Length scale of the features of u; the near-field split radius
    /// defaults to a tenth of this.
    pub fn feature_scale(&self) -> f64 {
        match &self.family {
            Family::Gaussian { width, .. } => *width,
            Family::Bump { outer, inner, .. } => (outer - inner).min(*inner),
            Family::Cosine { wave, .. } => {
                let k = norm(wave);
                if k > 0.0 {
                    1.0 / k
                } else {
                    1.0
                }
            }
            Family::Closed { form, .. } => match form {
                ClosedForm::Fundamental => 1.0,
                ClosedForm::RegularizedFundamental { y0 }
                | ClosedForm::ExtensionPoisson { y0 }
                | ClosedForm::Yamabe { y0 } => *y0,
                ClosedForm::Torsion { radius, .. } => *radius,
            },
            Family::Sampled { field } => 4.0 * field.step(),
            Family::Closure { meta, .. } => meta.scale,
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match &self.family {
            Family::Gaussian { .. } | Family::Bump { .. } => 1.0,
            Family::Cosine { amp, .. } => amp.abs(),
            Family::Closed { form, params } => match form {
                ClosedForm::Fundamental => f64::INFINITY,
                ClosedForm::RegularizedFundamental { .. }
                | ClosedForm::ExtensionPoisson { .. }
                | ClosedForm::Yamabe { .. } => {
                    self.value(&vec![0.0; params.n as usize]).abs()
                }
                ClosedForm::Torsion { radius, .. } => {
                    torsion_coefficient(params) * radius.powf(2.0 * params.s)
                }
            },
            Family::Sampled { field } => {
                field.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }
            Family::Closure { meta, .. } => meta.sup,
        }
    }

    /// Total integral where finite and known.
    pub fn mass(&self) -> Option<f64> {
        match &self.family {
            Family::Gaussian { width, .. } => Some(width.powi(self.n as i32)),
            Family::Bump { inner, outer, .. } => {
                // sigma_{n-1} int_0^outer profile(r) r^{n-1} dr
                let (inner, outer) = (*inner, *outer);
                let nn = self.n as f64;
                let flat = inner.powf(nn) / nn;
                let ring = crate::quad::gl_fixed(
                    |r: f64| quintic((r - inner) / (outer - inner)) * r.powf(nn - 1.0),
                    inner,
                    outer,
                    48,
                );
                Some(sigma_n1(self.n) * (flat + ring))
            }
            Family::Cosine { .. } => None,
            Family::Closed { form, params } => match form {
                ClosedForm::ExtensionPoisson { .. } => Some(1.0),
                ClosedForm::Torsion { radius, .. } => {
                    let (n, s) = (params.nf(), params.s);
                    Some(
                        torsion_coefficient(params)
                            * sigma_n1(params.n)
                            * radius.powf(n + 2.0 * s)
                            * gamma_unchecked(0.5 * n)
                            * gamma_unchecked(s + 1.0)
                            / (2.0 * gamma_unchecked(0.5 * n + s + 1.0)),
                    )
                }
                _ => None,
            },
            Family::Sampled { .. } | Family::Closure { .. } => None,
        }
    }

    pub fn far_field(&self) -> FarField {
        match &self.family {
            Family::Gaussian { center, width } => {
                FarField::SuperExp { amp: 1.0, width: *width, shift: norm(center) }
            }
            Family::Bump { center, outer, .. } => {
                FarField::Compact { radius: norm(center) + outer }
            }
            Family::Cosine { wave, amp } => {
                if norm(wave) == 0.0 {
                    FarField::Limit { value: *amp }
                } else {
                    FarField::Oscillatory { amp: amp.abs() }
                }
            }
            Family::Closed { form, params } => match form {
                ClosedForm::Fundamental => {
                    if params.n == 1 && params.s == 0.5 {
                        FarField::Bounded { sup: f64::INFINITY } // log growth
                    } else {
                        FarField::Power {
                            coeff: crate::closed_forms::alpha_ns(params)
                                .unwrap_or(f64::INFINITY),
                            exponent: params.nf() - 2.0 * params.s,
                            from: 1e-12,
                        }
                    }
                }
                ClosedForm::RegularizedFundamental { .. } => FarField::Power {
                    coeff: crate::closed_forms::alpha_ns(params).unwrap_or(f64::INFINITY),
                    exponent: params.nf() - 2.0 * params.s,
                    from: 1e-12,
                },
                ClosedForm::ExtensionPoisson { .. } | ClosedForm::Yamabe { .. } => {
                    let (_, beta, coef) =
                        closed_radial_shape(form, params).unwrap_or((0.0, 0.0, f64::INFINITY));
                    FarField::Power { coeff: coef, exponent: 2.0 * beta, from: 1e-12 }
                }
                ClosedForm::Torsion { center, radius } => {
                    FarField::Compact { radius: norm(center) + radius }
                }
            },
            Family::Sampled { field } => {
                if field.periodic {
                    FarField::Bounded { sup: self.sup_abs() }
                } else {
                    FarField::Compact {
                        radius: field.half_width * (field.n as f64).sqrt() + field.step(),
                    }
                }
            }
            Family::Closure { meta, .. } => meta.far.clone(),
        }
    }

    /// Radii (from x) at which u can lose smoothness along some ray, used
    /// as forced panel boundaries by the radial quadratures.
    pub fn radial_breaks(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::new();
        let mut push_shell = |center: &[f64], radii: &[f64]| {
            let d = x
                .iter()
                .zip(center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            for &r in radii {
                let lo = (r - d).abs();
                if lo > 0.0 {
                    out.push(lo);
                }
                out.push(r + d);
            }
        };
        match &self.family {
            Family::Bump { center, inner, outer } => push_shell(center, &[*inner, *outer]),
            Family::Closed { form, .. } => {
                if let ClosedForm::Torsion { center, radius } = form {
                    push_shell(center, &[*radius]);
                }
            }
            _ => {}
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    /// Fails when a non-periodic sampled field would be probed outside its
    /// box; all other families evaluate everywhere.
    pub fn check_ball(&self, x: &[f64], r: f64) -> FracResult<()> {
        if let Family::Sampled { field } = &self.family {
            if !field.periodic {
                let worst = x.iter().map(|v| v.abs()).fold(0.0f64, f64::max) + r;
                if worst > field.half_width {
                    return Err(FracError::Domain(format!(
                        "sampled field on [-{l}, {l}]^n probed out to {worst:.3}",
                        l = field.half_width
                    )));
                }
            }
        }
        Ok(())
    }

    /// True when u is C^2 in a neighborhood of x with analytic derivative
    /// data (enables the near-field Taylor core).
    pub fn has_analytic_core(&self) -> bool {
        !matches!(self.family, Family::Sampled { .. } | Family::Closure { .. })
    }

    /// Cosine families need their own oscillatory far treatment.
    pub fn as_cosine(&self) -> Option<(&[f64], f64)> {
        if let Family::Cosine { wave, amp } = &self.family {
            Some((wave.as_slice(), *amp))
        } else {
            None
        }
    }

    /// Gaussian view (center, width); the heat semigroup acts on these in
    /// closed form.
    pub fn as_gaussian(&self) -> Option<(&[f64], f64)> {
        if let Family::Gaussian { center, width } = &self.family {
            Some((center.as_slice(), *width))
        } else {
            None
        }
    }

    /// Closed-form view, when this family wraps one.
    pub fn as_closed(&self) -> Option<(&ClosedForm, &FracParams)> {
        if let Family::Closed { form, params } = &self.family {
            Some((form, params))
        } else {
            None
        }
    }

    /// Radial profile u(r e_1), meaningful for the radial families.
    pub fn radial_profile(&self, r: f64) -> f64 {
        let mut x = vec![0.0; self.n as usize];
        x[0] = r;
        self.value(&x)
    }

    /// True when the family is a radial function about the origin.
    pub fn is_radial(&self) -> bool {
        match &self.family {
            Family::Gaussian { center, .. } => center.iter().all(|&c| c == 0.0),
            Family::Bump { center, .. } => center.iter().all(|&c| c == 0.0),
            Family::Cosine { wave, .. } => wave.iter().all(|&k| k == 0.0),
            Family::Closed { form, .. } => match form {
                ClosedForm::Torsion { center, .. } => center.iter().all(|&c| c == 0.0),
                _ => true,
            },
            Family::Sampled { .. } | Family::Closure { .. } => false,
        }
    }
}
