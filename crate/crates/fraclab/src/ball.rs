//! Ball machinery for the mean-value side of the operator: the nonlocal
//! average A_r^{(s)} * u, the s-harmonic Poisson kernel of a ball, Dirichlet
//! solves from exterior boundary data, and the Green function at the center.
//!
//! Both the average and the Dirichlet solve are one-dimensional integrals per
//! direction after the substitution rho = r sec(theta), which compresses the
//! exterior (r, infinity) onto (0, pi/2) and turns the kernel weight into
//! tan^{1-2s}(theta). That exponent is singular at one endpoint for every
//! s != 1/2, so the integrands are built from the stable endpoint distances
//! handed over by the tanh-sinh rule.

use crate::closed_forms::fundamental_solution;
use crate::error::{FracError, FracResult};
use crate::field::{ClosureMeta, FarField, FunctionSpec, QuadratureSpec};
use crate::quad::{oscillatory_tail, sphere_rule, tanh_sinh_sing};
use crate::special::{constants, FracParams, PI};

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Integral over (0, theta_max) of tan^{1-2s}(theta) * g(tan, sec), split at
/// the given interior angles (kink radii of the probed function mapped into
/// the angle variable). g receives stable tan and sec values; near pi/2 both
/// are rebuilt from the distance to the endpoint, where the naive formulas
/// lose all digits.
fn theta_integral<F: FnMut(f64, f64) -> f64>(
    mut g: F,
    theta_max: f64,
    splits: &[f64],
    one_minus_2s: f64,
    eps: f64,
) -> f64 {
    let mut bounds = vec![0.0];
    for &t in splits {
        if t > 1e-14 && t < theta_max - 1e-14 {
            bounds.push(t);
        }
    }
    bounds.push(theta_max);
    let closes_right = (theta_max - 0.5 * PI).abs() < 1e-15;
    let mut total = 0.0;
    for (seg, win) in bounds.windows(2).enumerate() {
        let last = seg == bounds.len() - 2;
        total += tanh_sinh_sing(
            |th, _dl, dr| {
                // distance to pi/2, kept stable only where it matters
                let w = if last && closes_right { dr } else { 0.5 * PI - th };
                let (tn, sec) = if w < 1e-8 {
                    (1.0 / w.tan(), 1.0 / w.sin())
                } else {
                    (th.tan(), 1.0 / th.cos())
                };
                if !sec.is_finite() {
                    return 0.0;
                }
                tn.powf(one_minus_2s) * g(tn, sec)
            },
            win[0],
            win[1],
            eps,
            11,
        );
    }
    total
}

/// Angles at which u, probed along x + r sec(theta) dir, can lose smoothness;
/// derived from the function's break radii. The radii are worst-case over
/// directions, so for n >= 2 these splits bracket rather than hit the kink.
fn break_angles(u: &FunctionSpec, x: &[f64], r: f64, rho_cap: f64) -> Vec<f64> {
    u.radial_breaks(x)
        .into_iter()
        .filter(|&rho| rho > r && rho < rho_cap)
        .map(|rho| (r / rho).acos())
        .collect()
}

/// The nonlocal mean (A_r^{(s)} * u)(x): the average of u against the
/// exterior kernel c(n,s) r^{2s} (|y|^2-r^2)^{-s} |y|^{-n} supported outside
/// the ball of radius r. Normalized so constants are reproduced exactly.
pub fn mean_value_apply(
    u: &FunctionSpec,
    x: &[f64],
    r: f64,
    p: &FracParams,
    quad: &QuadratureSpec,
) -> FracResult<f64> {
    if u.n != p.n || x.len() != p.n as usize {
        return Err(FracError::Domain(format!(
            "mean value in n = {} needs matching field and point, got u.n = {}, x.len() = {}",
            p.n,
            u.n,
            x.len()
        )));
    }
    if !(r > 0.0) {
        return Err(FracError::Domain(format!("ball radius must be positive, got {r}")));
    }
    quad.validate()?;
    let c = constants(p)?.c_ns;
    let s = p.s;
    let dirs = sphere_rule(p.n, quad.nodes_angular);
    let far = u.far_field();

    // Compactly supported u contributes nothing beyond its support radius,
    // which caps the substitution and keeps box-limited sampled data inside
    // its own zero extension.
    let rho_cap = match far {
        FarField::Compact { radius } => {
            let cap = radius + norm(x);
            if cap <= r {
                return Ok(0.0);
            }
            cap
        }
        _ => f64::INFINITY,
    };

    if let FarField::Oscillatory { .. } = far {
        return mean_value_oscillatory(u, x, r, c, p, quad, &dirs);
    }

    let theta_max = if rho_cap.is_finite() { (r / rho_cap).acos() } else { 0.5 * PI };
    let splits = break_angles(u, x, r, rho_cap);
    let nn = p.n as usize;
    let mut sum = 0.0;
    let mut y = [0.0f64; 3];
    for (dir, w) in &dirs {
        sum += w * theta_integral(
            |_tn, sec| {
                let rad = r * sec;
                for i in 0..nn {
                    y[i] = x[i] + rad * dir[i];
                }
                u.value(&y[..nn])
            },
            theta_max,
            &splits,
            1.0 - 2.0 * s,
            1e-12,
        );
    }
    Ok(c * sum)
}

/// Mean value for mean-zero oscillatory fields (cosines): the theta
/// substitution compresses infinitely many oscillations against pi/2, so
/// integrate in rho instead, with accelerated half-period segments.
fn mean_value_oscillatory(
    u: &FunctionSpec,
    x: &[f64],
    r: f64,
    c: f64,
    p: &FracParams,
    quad: &QuadratureSpec,
    dirs: &[([f64; 3], f64)],
) -> FracResult<f64> {
    let s = p.s;
    let nn = p.n as usize;
    let wave_pitch = |dir: &[f64; 3]| -> f64 {
        match u.as_cosine() {
            Some((wave, _)) => {
                let k: f64 = wave.iter().zip(dir.iter()).map(|(a, b)| a * b).sum();
                if k.abs() > 1e-9 {
                    0.5 / k.abs()
                } else {
                    8.0 * r
                }
            }
            None => 8.0 * r,
        }
    };
    let mut sum = 0.0;
    for (dir, w) in dirs {
        let probe = |rho: f64, dl: f64| {
            let mut y = [0.0f64; 3];
            for i in 0..nn {
                y[i] = x[i] + rho * dir[i];
            }
            // (rho^2 - r^2)^{-s} = (rho - r)^{-s} (rho + r)^{-s}, first factor
            // from the stable distance when provided
            let gap = if dl >= 0.0 { dl } else { rho - r };
            gap.powf(-s) * (rho + r).powf(-s) / rho * u.value(&y[..nn])
        };
        let head = tanh_sinh_sing(|rho, dl, _| probe(rho, dl), r, 2.0 * r, 1e-12, 11);
        let pitch = wave_pitch(dir);
        let (tail, _err) = oscillatory_tail(
            |rho| probe(rho, -1.0),
            2.0 * r,
            |k| 2.0 * r + (k as f64 + 1.0) * pitch,
            quad.nodes_far.max(16),
            1e-13,
            400,
        );
        sum += w * (head + tail);
    }
    Ok(c * r.powf(2.0 * s) * sum)
}

/// Density of the s-harmonic measure of B(center, radius) seen from an
/// interior point x, evaluated at an exterior point y.
pub fn poisson_kernel_ball(
    x: &[f64],
    y: &[f64],
    center: &[f64],
    radius: f64,
    p: &FracParams,
) -> FracResult<f64> {
    let nn = p.n as usize;
    if x.len() != nn || y.len() != nn || center.len() != nn {
        return Err(FracError::Domain("point dimensions must match params".into()));
    }
    if !(radius > 0.0) {
        return Err(FracError::Domain(format!("ball radius must be positive, got {radius}")));
    }
    let dx2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
    let dy2: f64 = y.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
    let r2 = radius * radius;
    if dx2 >= r2 {
        return Err(FracError::Domain("kernel base point must lie inside the ball".into()));
    }
    if dy2 <= r2 {
        return Err(FracError::Domain("kernel is supported outside the closed ball".into()));
    }
    let c = constants(p)?.c_ns;
    let sep2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(c * ((r2 - dx2) / (dy2 - r2)).powf(p.s) * sep2.powf(-0.5 * p.n as f64))
}

/// Value at x inside B(center, radius) of the s-harmonic function with
/// exterior data phi: the integral of phi against the Poisson kernel, in the
/// same sec-substituted form as the mean value.
pub fn solve_dirichlet(
    phi: &FunctionSpec,
    center: &[f64],
    radius: f64,
    x: &[f64],
    p: &FracParams,
    quad: &QuadratureSpec,
) -> FracResult<f64> {
    let nn = p.n as usize;
    if phi.n != p.n || x.len() != nn || center.len() != nn {
        return Err(FracError::Domain("dimension mismatch in Dirichlet solve".into()));
    }
    quad.validate()?;
    let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
    let r2 = radius * radius;
    if d2 >= r2 {
        return Err(FracError::Domain("Dirichlet solve needs x strictly inside the ball".into()));
    }
    let c = constants(p)?.c_ns;
    let s = p.s;
    let nf = p.n as f64;

    let far = phi.far_field();
    match far {
        FarField::Oscillatory { .. } => {
            return Err(FracError::Domain(
                "Dirichlet data must decay or level off; oscillatory tails are not supported"
                    .into(),
            ));
        }
        FarField::Bounded { sup } if !sup.is_finite() => {
            return Err(FracError::Domain(
                "Dirichlet data needs a finite growth certificate".into(),
            ));
        }
        _ => {}
    }
    let rho_cap = match far {
        FarField::Compact { radius: rc } => {
            let cap = rc + norm(center);
            if cap <= radius {
                return Ok(0.0);
            }
            cap
        }
        _ => f64::INFINITY,
    };
    let theta_max = if rho_cap.is_finite() { (radius / rho_cap).acos() } else { 0.5 * PI };

    // kink angles of phi along the boundary rays, from the break radii
    // measured around the probe center
    let splits: Vec<f64> = phi
        .radial_breaks(center)
        .into_iter()
        .filter(|&rho| rho > radius && rho < rho_cap)
        .map(|rho| (radius / rho).acos())
        .collect();
    let dirs = sphere_rule(p.n, quad.nodes_angular);
    let mut sum = 0.0;
    let mut y = [0.0f64; 3];
    for (dir, w) in &dirs {
        sum += w * theta_integral(
            |_tn, sec| {
                if sec > 1e14 {
                    return 0.0;
                }
                let rad = radius * sec;
                let mut sep2 = 0.0;
                for i in 0..nn {
                    y[i] = center[i] + rad * dir[i];
                    let d = y[i] - x[i];
                    sep2 += d * d;
                }
                // sec^n / |y - x|^n computed as a ratio; both factors grow
                // like sec while the quotient stays O(1/radius)
                let q = sec / sep2.sqrt();
                q.powf(nf) * phi.value(&y[..nn])
            },
            theta_max,
            &splits,
            1.0 - 2.0 * s,
            1e-12,
        );
    }
    Ok(c * (r2 - d2).powf(s) * radius.powf(nf - 2.0 * s) * sum)
}

/// The full s-harmonic solution as a function family: the kernel integral
/// inside the ball, the boundary data itself outside. The closure carries
/// phi's growth certificate and, by the maximum principle, its sup.
pub fn dirichlet_solution(
    phi: &FunctionSpec,
    center: &[f64],
    radius: f64,
    p: &FracParams,
    quad: &QuadratureSpec,
) -> FracResult<FunctionSpec> {
    // surface errors (bad certificates, dimension mismatch) eagerly
    solve_dirichlet(phi, center, radius, &center.to_vec(), p, quad)?;
    let phi_own = phi.clone();
    let c = center.to_vec();
    let (pp, qq, r) = (*p, *quad, radius);
    let meta = ClosureMeta {
        scale: radius.min(phi.feature_scale()),
        sup: phi.sup_abs(),
        far: phi.far_field(),
    };
    Ok(FunctionSpec::closure(
        p.n,
        move |z: &[f64]| {
            let d2: f64 = z.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < r * r {
                solve_dirichlet(&phi_own, &c, r, z, &pp, &qq).unwrap_or(f64::NAN)
            } else {
                phi_own.value(z)
            }
        },
        meta,
    ))
}

/// Green function of B(center, radius) with pole at the center, evaluated at
/// an interior point y != center: the fundamental solution minus its
/// s-harmonic replacement inside the ball.
///
/// The replacement's boundary data is radial about the center, so the angular
/// part of the Poisson integral collapses exactly,
///
///   int_{S^{n-1}} |rho w - x|^{-n} dw  =  sigma_{n-1} rho^{2-n} / (rho^2 - d^2),
///
/// leaving one radial integral. Substituting rho = R/t maps the exterior onto
/// (0, 1] with the boundary gap 1 - t held exactly by the quadrature; the
/// result stays accurate arbitrarily close to the sphere, where the angular
/// form of the solve would need thousands of nodes to resolve the kernel peak.
pub fn green_center(
    center: &[f64],
    radius: f64,
    y: &[f64],
    p: &FracParams,
    quad: &QuadratureSpec,
) -> FracResult<f64> {
    if p.nf() <= 2.0 * p.s {
        return Err(FracError::Branch(
            "Green function at the center needs n > 2s (polynomial fundamental branch)".into(),
        ));
    }
    quad.validate()?;
    let rel: Vec<f64> = y.iter().zip(center).map(|(a, b)| a - b).collect();
    let d = norm(&rel);
    if d == 0.0 {
        return Err(FracError::Domain("Green function diverges at its pole".into()));
    }
    if d >= radius {
        return Err(FracError::Domain("Green function evaluation point must be inside".into()));
    }
    let cs = constants(p)?;
    let alpha = crate::closed_forms::alpha_ns(p)?;
    let direct = fundamental_solution(&rel, p)?;
    let (s, nf) = (p.s, p.nf());
    let r2 = radius * radius;
    let d2 = d * d;
    let pre = alpha * radius.powf(2.0 * s - nf) * r2;
    let i = tanh_sinh_sing(
        |t, _dl, dr| {
            if t <= 1e-150 {
                return 0.0;
            }
            // (rho^2 - R^2)^{-s} in terms of the exact gap 1 - t
            let gap = if dr < 1e-8 { dr } else { 1.0 - t };
            pre * (r2 * gap * (1.0 + t)).powf(-s) * t.powf(nf - 1.0) / (r2 - d2 * t * t)
        },
        0.0,
        1.0,
        1e-13,
        8,
    );
    Ok(direct - cs.c_ns * cs.sigma_n1 * (r2 - d2).powf(s) * i)
}
