//! Closed-form kernels and solutions used as oracles by the rest of the
//! crate: the fundamental solution of (-Delta)^s, its regularized version
//! with an exact fractional Laplacian, the extension Poisson kernel, the
//! Yamabe bubble, and the ball torsion function.

use crate::error::{FracError, FracResult};
use crate::special::{gamma_unchecked, FracParams, PI, SQRT_PI};

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// alpha(n,s) of the fundamental solution E_s = alpha |x|^{2s-n}; requires
/// n > 2s.
pub fn alpha_ns(p: &FracParams) -> FracResult<f64> {
    let (n, s) = (p.nf(), p.s);
    if n <= 2.0 * p.s {
        return Err(FracError::Branch(format!(
            "fundamental-solution constant needs n > 2s, got n = {n}, s = {}",
            p.s
        )));
    }
    Ok(gamma_unchecked(0.5 * (n - 2.0 * s))
        / ((2.0f64).powf(2.0 * s) * PI.powf(0.5 * n) * gamma_unchecked(s)))
}

/// E_s(x): alpha(n,s)|x|^{2s-n} when n > 2s, and the logarithmic branch
/// -(1/pi) log|x| in the borderline case n = 1, s = 1/2 (no additive
/// constant). Other (n, s) combinations are rejected.
pub fn fundamental_solution(x: &[f64], p: &FracParams) -> FracResult<f64> {
    let r2 = norm_sq(x);
    if r2 == 0.0 {
        return Err(FracError::Domain("fundamental solution pole at x = 0".into()));
    }
    if p.n == 1 && p.s == 0.5 {
        return Ok(-0.5 * r2.ln() / PI);
    }
    if p.n == 1 && p.s > 0.5 {
        return Err(FracError::Branch(format!(
            "no fundamental solution branch for n = 1, s = {} > 1/2",
            p.s
        )));
    }
    Ok(alpha_ns(p)? * r2.powf((2.0 * p.s - p.nf()) / 2.0))
}

/// Value and exact fractional Laplacian of the regularized fundamental
/// solution E_{s,y0}(x) = alpha(n,s)(y0^2 + |x|^2)^{(2s-n)/2}.
#[derive(Clone, Copy, Debug)]
pub struct Regularized {
    pub value: f64,
    pub exact_frac_lap: f64,
}

pub fn regularized_fundamental(x: &[f64], y0: f64, p: &FracParams) -> FracResult<Regularized> {
    if y0 <= 0.0 {
        return Err(FracError::Domain(format!("regularization height y0 = {y0} must be positive")));
    }
    let alpha = alpha_ns(p)?; // rejects the n = 1, s >= 1/2 branch
    let value = alpha * (y0 * y0 + norm_sq(x)).powf((2.0 * p.s - p.nf()) / 2.0);
    // same gamma evaluations as the Poisson kernel, so the identity
    // P_s(x, y0) = (-Delta)^s E_{s,y0}(x) holds bit for bit
    let exact_frac_lap = extension_poisson_kernel(x, y0, p)?;
    Ok(Regularized { value, exact_frac_lap })
}

/// P_s(x,y) = Gamma(n/2+s) / (pi^{n/2} Gamma(s)) * y^{2s} (y^2+|x|^2)^{-(n+2s)/2},
/// the Poisson kernel of the extension problem.
pub fn extension_poisson_kernel(x: &[f64], y: f64, p: &FracParams) -> FracResult<f64> {
    if y <= 0.0 {
        return Err(FracError::Domain(format!("Poisson kernel height y = {y} must be positive")));
    }
    let (n, s) = (p.nf(), p.s);
    let c = gamma_unchecked(n / 2.0 + s) / (PI.powf(n / 2.0) * gamma_unchecked(s));
    Ok(c * y.powf(2.0 * s) * (y * y + norm_sq(x)).powf(-(n + 2.0 * s) / 2.0))
}

/// Yamabe bubble v(x) = kappa(n,s) (y0/(y0^2+|x|^2))^{(n-2s)/2} together with
/// the right-hand side of the equation it solves, (-Delta)^s v = v^{(n+2s)/(n-2s)}.
#[derive(Clone, Copy, Debug)]
pub struct Yamabe {
    pub value: f64,
    pub rhs: f64,
}

pub fn yamabe_solution(x: &[f64], y0: f64, p: &FracParams) -> FracResult<Yamabe> {
    if p.n < 2 {
        return Err(FracError::Branch("Yamabe solutions need n >= 2".into()));
    }
    if y0 <= 0.0 {
        return Err(FracError::Domain(format!("bubble height y0 = {y0} must be positive")));
    }
    let (n, s) = (p.nf(), p.s);
    let kappa = 2.0f64.powf((n - 2.0 * s) / 2.0)
        * (gamma_unchecked((n + 2.0 * s) / 2.0) / gamma_unchecked((n - 2.0 * s) / 2.0))
            .powf((n - 2.0 * s) / (4.0 * s));
    let value = kappa * (y0 / (y0 * y0 + norm_sq(x))).powf((n - 2.0 * s) / 2.0);
    let rhs = value.powf((n + 2.0 * s) / (n - 2.0 * s));
    Ok(Yamabe { value, rhs })
}

/// Torsion coefficient Gamma(n/2) / (4^s Gamma((n+2s)/2) Gamma(s+1)).
pub fn torsion_coefficient(p: &FracParams) -> f64 {
    let (n, s) = (p.nf(), p.s);
    gamma_unchecked(0.5 * n)
        / ((2.0f64).powf(2.0 * s) * gamma_unchecked(0.5 * (n + 2.0 * s)) * gamma_unchecked(s + 1.0))
}

/// Torsion function of the ball B(center, radius): the solution of
/// (-Delta)^s u = 1 inside with zero exterior data,
/// coefficient * (R^2 - |x-center|^2)_+^s. No boundary smoothing: the
/// s-Hoelder behavior at the sphere is exact.
pub fn torsion(x: &[f64], center: &[f64], radius: f64, p: &FracParams) -> FracResult<f64> {
    if radius <= 0.0 {
        return Err(FracError::Domain(format!("ball radius {radius} must be positive")));
    }
    let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
    let gap = radius * radius - d2;
    if gap <= 0.0 {
        return Ok(0.0);
    }
    Ok(torsion_coefficient(p) * gap.powf(p.s))
}

/// Tags a closed form so a function family can point at it.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosedForm {
    Fundamental,
    RegularizedFundamental { y0: f64 },
    ExtensionPoisson { y0: f64 },
    Yamabe { y0: f64 },
    Torsion { center: Vec<f64>, radius: f64 },
}

impl ClosedForm {
    pub fn value(&self, x: &[f64], p: &FracParams) -> FracResult<f64> {
        match self {
            ClosedForm::Fundamental => fundamental_solution(x, p),
            ClosedForm::RegularizedFundamental { y0 } => {
                Ok(regularized_fundamental(x, *y0, p)?.value)
            }
            ClosedForm::ExtensionPoisson { y0 } => extension_poisson_kernel(x, *y0, p),
            ClosedForm::Yamabe { y0 } => Ok(yamabe_solution(x, *y0, p)?.value),
            ClosedForm::Torsion { center, radius } => torsion(x, center, *radius, p),
        }
    }
}

/// sqrt(pi), re-exported for tests that spell closed forms out.
pub const ROOT_PI: f64 = SQRT_PI;

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol * b.abs().max(1.0),
            "got {a:.17e}, want {b:.17e}"
        );
    }

    #[test]
    fn fundamental_branches() {
        let p = FracParams::new(3, 0.5).unwrap();
        close(fundamental_solution(&[1.0, 0.0, 0.0], &p).unwrap(), 0.050660591821168886, 1e-14);
        let p = FracParams::new(1, 0.5).unwrap();
        close(fundamental_solution(&[1.0], &p).unwrap(), 0.0, 1e-14);
        close(fundamental_solution(&[2.0], &p).unwrap(), -(2.0f64).ln() / PI, 1e-14);
        let p = FracParams::new(2, 0.5).unwrap();
        close(fundamental_solution(&[2.0, 0.0], &p).unwrap(), 0.079577471545947668, 1e-14);
        assert!(fundamental_solution(&[0.0, 0.0], &p).is_err());
        let p = FracParams::new(1, 0.7).unwrap();
        assert!(matches!(fundamental_solution(&[1.0], &p), Err(FracError::Branch(_))));
    }

    #[test]
    fn regularized_matches_poisson_kernel_bitwise() {
        for &(n, s) in &[(1u32, 0.3), (2, 0.5), (3, 0.7)] {
            let p = FracParams::new(n, s).unwrap();
            let x = vec![0.4; n as usize];
            let reg = regularized_fundamental(&x, 0.8, &p).unwrap();
            let pk = extension_poisson_kernel(&x, 0.8, &p).unwrap();
            assert_eq!(reg.exact_frac_lap.to_bits(), pk.to_bits());
        }
        let p = FracParams::new(2, 0.5).unwrap();
        let reg = regularized_fundamental(&[0.0, 0.0], 1.0, &p).unwrap();
        close(reg.value, 0.15915494309189534, 1e-14);
        close(reg.exact_frac_lap, 0.15915494309189534, 1e-14);
    }

    #[test]
    fn exact_frac_lap_scaling() {
        // joint homogeneity: the kernel keeps unit mass in x at every height,
        // so scaling (x, y0) by lambda scales the output by lambda^{-n};
        // the value itself scales by lambda^{2s-n}
        let p = FracParams::new(3, 0.7).unwrap();
        let lam = 1.7;
        let a = regularized_fundamental(&[1.0, -0.5, 0.25], 0.6, &p).unwrap();
        let b = regularized_fundamental(&[lam, -0.5 * lam, 0.25 * lam], 0.6 * lam, &p).unwrap();
        close(b.exact_frac_lap, a.exact_frac_lap * lam.powf(-p.nf()), 1e-13);
        close(b.value, a.value * lam.powf(2.0 * p.s - p.nf()), 1e-13);
    }

    #[test]
    fn poisson_kernel_values() {
        let p = FracParams::new(1, 0.5).unwrap();
        close(extension_poisson_kernel(&[0.0], 1.0, &p).unwrap(), 1.0 / PI, 1e-14);
        // s = 1/2 reduces to the classical half-space Poisson kernel
        for &n in &[1u32, 2, 3] {
            let p = FracParams::new(n, 0.5).unwrap();
            let x = vec![0.3; n as usize];
            let y = 0.9;
            let classical = gamma_unchecked((n as f64 + 1.0) / 2.0)
                * PI.powf(-(n as f64 + 1.0) / 2.0)
                * y
                * (y * y + norm_sq(&x)).powf(-(n as f64 + 1.0) / 2.0);
            close(extension_poisson_kernel(&x, y, &p).unwrap(), classical, 1e-14);
        }
        assert!(extension_poisson_kernel(&[0.0], 0.0, &FracParams::new(1, 0.3).unwrap()).is_err());
    }

    #[test]
    fn poisson_kernel_unit_mass() {
        // int P_s(x, y) dx = 1 at n = 2, s = 0.3, y = 0.7, by radial
        // quadrature with the substitution rho = y tan(psi)
        let p = FracParams::new(2, 0.3).unwrap();
        let y = 0.7;
        let f = |psi: f64| {
            let rho = y * psi.tan();
            let k = extension_poisson_kernel(&[rho, 0.0], y, &p).unwrap();
            let drho = y / psi.cos().powi(2);
            std::f64::consts::TAU * rho * k * drho
        };
        let mass = crate::quad::tanh_sinh(f, 0.0, 0.5 * PI, 1e-12, 10);
        close(mass, 1.0, 1e-8);
    }

    #[test]
    fn yamabe_values() {
        let p = FracParams::new(3, 0.5).unwrap();
        let sol = yamabe_solution(&[0.0, 0.0, 0.0], 1.0, &p).unwrap();
        close(sol.value, 2.0, 1e-14);
        close(sol.rhs, 4.0, 1e-14);
        let p = FracParams::new(3, 0.7).unwrap();
        let sol = yamabe_solution(&[0.0; 3], 1.0, &p).unwrap();
        close(sol.value, 1.6871235748060328, 1e-14);
        // translation covariance is trivial: value depends on |x| only
        let a = yamabe_solution(&[0.3, -0.4, 0.0], 1.0, &p).unwrap().value;
        let b = yamabe_solution(&[0.0, 0.5, 0.0], 1.0, &p).unwrap().value;
        close(a, b, 1e-14);
        assert!(yamabe_solution(&[0.0], 1.0, &FracParams::new(1, 0.3).unwrap()).is_err());
    }

    #[test]
    fn torsion_values() {
        let p = FracParams::new(1, 0.5).unwrap();
        close(torsion(&[0.0], &[0.0], 1.0, &p).unwrap(), 1.0, 1e-14);
        close(torsion(&[0.6], &[0.0], 1.0, &p).unwrap(), (1.0f64 - 0.36).sqrt(), 1e-14);
        assert_eq!(torsion(&[1.0], &[0.0], 1.0, &p).unwrap(), 0.0);
        assert_eq!(torsion(&[-3.0], &[0.0], 1.0, &p).unwrap(), 0.0);
        let p = FracParams::new(3, 0.5).unwrap();
        close(torsion_coefficient(&p), 0.5, 1e-14);
        // s -> 1 recovers the classical coefficient 1/(2n)
        let p = FracParams::new(3, 0.999).unwrap();
        close(torsion_coefficient(&p), 1.0 / 6.0, 1e-3);
    }

    #[test]
    fn closed_form_dispatch() {
        let p = FracParams::new(2, 0.5).unwrap();
        let cf = ClosedForm::RegularizedFundamental { y0: 1.0 };
        close(cf.value(&[0.0, 0.0], &p).unwrap(), 0.15915494309189534, 1e-14);
        let cf = ClosedForm::Torsion { center: vec![0.0, 0.0], radius: 2.0 };
        assert!(cf.value(&[3.0, 0.0], &p).unwrap() == 0.0);
    }
}
