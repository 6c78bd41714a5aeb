//! Dirichlet and Fejér kernels with the closed-form identities used as
//! numerical self-checks.
//!
//! The rescaled Dirichlet kernel is D_N(x) = sin((2N+1)x/2) / ((2N+1) sin(x/2))
//! and the Fejér kernel F_M(x) = (1/(M+1)) (sin((M+1)x/2)/sin(x/2))². Squared
//! derivatives of F_M integrate to rational closed forms via Parseval; those
//! exact values back the quadrature checks in [`kernels_report`].

use crate::float::Real;

/// Derivative order for [`fejer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    None,
    First,
    Second,
}

/// Rescaled Dirichlet kernel; the removable singularity at x ≡ 0 (mod 2π)
/// evaluates to 1.
pub fn dirichlet<T: Real>(n: usize, x: T) -> T {
    let half = x / T::from_f(2.0);
    let s = half.sin();
    if s.abs() < T::from_f(1e-9) {
        return T::one();
    }
    let m = T::from_n(2 * n + 1);
    (m * half).sin() / (m * s)
}

/// Fejér kernel and its first two derivatives.
///
/// Order `None` uses the closed form with F_M(0) = M+1 at the singularity;
/// orders `First`/`Second` evaluate the real trigonometric sums
/// -2 Σ w_k k sin(kx) and -2 Σ w_k k² cos(kx) with w_k = 1 - k/(M+1).
pub fn fejer<T: Real>(m: usize, x: T, order: Deriv) -> T {
    let m1 = T::from_n(m + 1);
    match order {
        Deriv::None => {
            let half = x / T::from_f(2.0);
            let s = half.sin();
            if s.abs() < T::from_f(1e-9) {
                return m1;
            }
            let r = (m1 * half).sin() / s;
            r * r / m1
        }
        Deriv::First => {
            let mut acc = T::zero();
            for k in 1..=m {
                let kf = T::from_n(k);
                acc += (T::one() - kf / m1) * kf * (kf * x).sin();
            }
            -T::from_f(2.0) * acc
        }
        Deriv::Second => {
            let mut acc = T::zero();
            for k in 1..=m {
                let kf = T::from_n(k);
                acc += (T::one() - kf / m1) * kf * kf * (kf * x).cos();
            }
            -T::from_f(2.0) * acc
        }
    }
}

/// Exact value of ∫_{-π}^{π} (1/M³) |F'_M(x)|² dx.
pub fn fejer_d1_sq_integral<T: Real>(m: usize) -> T {
    let mf = m as f64;
    T::from_f(std::f64::consts::TAU * (mf.powi(3) + 4.0 * mf.powi(2) + 6.0 * mf + 4.0))
        / T::from_f(15.0 * mf.powi(2) * (mf + 1.0))
}

/// Exact value of ∫_{-π}^{π} (1/M⁵) |F''_M(x)|² dx.
pub fn fejer_d2_sq_integral<T: Real>(m: usize) -> T {
    let mf = m as f64;
    let num = 2.0 * mf.powi(5) + 12.0 * mf.powi(4) + 30.0 * mf.powi(3) + 40.0 * mf.powi(2)
        + 23.0 * mf
        - 2.0;
    T::from_f(std::f64::consts::TAU * num) / T::from_f(105.0 * mf.powi(4) * (mf + 1.0))
}

/// Parseval evaluation 2π Σ_{|k|<=M} w_k² k^{2d} of the squared-derivative
/// integrals (d = 1 or 2), bit-matching the quadrature target.
pub fn fejer_parseval_sum<T: Real>(m: usize, deriv: Deriv) -> T {
    let m1 = T::from_n(m + 1);
    let mut acc = T::zero();
    for k in 1..=m {
        let kf = T::from_n(k);
        let w = T::one() - kf / m1;
        let p = match deriv {
            Deriv::First => kf * kf,
            Deriv::Second => kf * kf * kf * kf,
            Deriv::None => T::one(),
        };
        acc += w * w * p;
    }
    let k0 = if matches!(deriv, Deriv::None) { T::one() } else { T::zero() };
    T::two_pi() * (k0 + T::from_f(2.0) * acc)
}

/// Midpoint quadrature of f over [-π, π]; exact for trigonometric polynomials
/// of degree below `points`.
pub fn periodic_quadrature<T: Real>(points: usize, mut f: impl FnMut(T) -> T) -> T {
    let h = T::two_pi() / T::from_n(points);
    let mut acc = T::zero();
    for j in 0..points {
        let x = -T::PI() + h * (T::from_n(j) + T::from_f(0.5));
        acc += f(x);
    }
    acc * h
}

/// Normalized squared-derivative kernel K_M; integrates to 2π and concentrates
/// at the origin as M grows.
pub fn good_kernel_d1<T: Real>(m: usize, x: T) -> T {
    let mf = m as f64;
    let norm = T::from_f(15.0 * (mf + 1.0) / (mf * (4.0 + 6.0 * mf + 4.0 * mf.powi(2) + mf.powi(3))));
    let d = fejer(m, x, Deriv::First);
    norm * d * d
}

/// Normalized |F''|² kernel L_M (same normalization convention as [`good_kernel_d1`]).
pub fn good_kernel_d2<T: Real>(m: usize, x: T) -> T {
    let mf = m as f64;
    let denom = mf
        * (2.0 * mf.powi(5) + 12.0 * mf.powi(4) + 30.0 * mf.powi(3) + 40.0 * mf.powi(2)
            + 23.0 * mf
            - 2.0);
    let norm = T::from_f(105.0 * (mf + 1.0) / denom);
    let d = fejer(m, x, Deriv::Second);
    norm * d * d
}

/// Tail mass ∫_{δ<=|x|<=π} K(x) dx of a kernel by quadrature.
pub fn tail_mass<T: Real>(delta: T, points: usize, mut kernel: impl FnMut(T) -> T) -> T {
    periodic_quadrature(points, |x: T| if x.abs() >= delta { kernel(x) } else { T::zero() })
}

/// One identity check: computed value vs target within tolerance.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub m: usize,
    pub computed: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: impl Into<String>, m: usize, computed: f64, target: f64, tol: f64) -> Self {
        let pass = (computed - target).abs() <= tol * target.abs().max(1.0);
        Self {
            name: name.into(),
            m,
            computed,
            target,
            tolerance: tol,
            pass,
        }
    }
}

/// Runs the full kernel identity suite for the given sizes.
///
/// Checks, per M: the unit mass (1/2π)∫F_M = 1, the squared-derivative
/// integrals against their closed forms, nonnegativity of F_M, the Dirichlet
/// bound |D_N| <= 1 with D_N(0) = 1, and monotone tail decay of the
/// normalized kernels over increasing M.
pub fn kernels_report(sizes: &[usize], tol: f64) -> Vec<IdentityCheck> {
    let mut checks = Vec::new();
    for &m in sizes {
        let points = (8 * m + 64).next_power_of_two();
        let mass = periodic_quadrature(points, |x: f64| fejer(m, x, Deriv::None))
            / std::f64::consts::TAU;
        checks.push(IdentityCheck::new("fejer_unit_mass", m, mass, 1.0, tol.min(1e-8)));

        let m3 = (m as f64).powi(3);
        let q1 = periodic_quadrature(points, |x: f64| {
            let d = fejer(m, x, Deriv::First);
            d * d / m3
        });
        checks.push(IdentityCheck::new(
            "fejer_d1_sq_integral",
            m,
            q1,
            fejer_d1_sq_integral(m),
            tol,
        ));
        let par1 = fejer_parseval_sum::<f64>(m, Deriv::First) / m3;
        checks.push(IdentityCheck::new(
            "fejer_d1_parseval_vs_closed_form",
            m,
            par1,
            fejer_d1_sq_integral(m),
            1e-12,
        ));

        let m5 = (m as f64).powi(5);
        let q2 = periodic_quadrature(points, |x: f64| {
            let d = fejer(m, x, Deriv::Second);
            d * d / m5
        });
        checks.push(IdentityCheck::new(
            "fejer_d2_sq_integral",
            m,
            q2,
            fejer_d2_sq_integral(m),
            tol,
        ));
        let par2 = fejer_parseval_sum::<f64>(m, Deriv::Second) / m5;
        checks.push(IdentityCheck::new(
            "fejer_d2_parseval_vs_closed_form",
            m,
            par2,
            fejer_d2_sq_integral(m),
            1e-12,
        ));

        let fmin = (0..points)
            .map(|j| {
                let x = -std::f64::consts::PI
                    + (j as f64 + 0.5) * std::f64::consts::TAU / points as f64;
                fejer(m, x, Deriv::None)
            })
            .fold(f64::INFINITY, f64::min);
        checks.push(IdentityCheck::new("fejer_nonnegative_min", m, fmin.min(0.0), 0.0, tol));

        checks.push(IdentityCheck::new(
            "dirichlet_at_zero",
            m,
            dirichlet(m, 0.0),
            1.0,
            1e-14,
        ));
        let dmax = (0..points)
            .map(|j| {
                let x = -std::f64::consts::PI
                    + (j as f64 + 0.5) * std::f64::consts::TAU / points as f64;
                dirichlet(m, x).abs()
            })
            .fold(0.0, f64::max);
        checks.push(IdentityCheck::new(
            "dirichlet_bounded_by_one",
            m,
            dmax.max(1.0),
            1.0,
            1e-12,
        ));
    }

    // good-kernel tail decay, monotone over doubling M
    let delta = 0.5;
    for (name, kern) in [
        ("good_kernel_d1_tail_decay", true),
        ("good_kernel_d2_tail_decay", false),
    ] {
        let tails: Vec<f64> = [8usize, 16, 32, 64]
            .iter()
            .map(|&m| {
                let pts = (16 * m + 64).next_power_of_two();
                if kern {
                    tail_mass(delta, pts, |x: f64| good_kernel_d1(m, x))
                } else {
                    tail_mass(delta, pts, |x: f64| good_kernel_d2(m, x))
                }
            })
            .collect();
        let monotone = tails.windows(2).all(|w| w[1] < w[0]);
        checks.push(IdentityCheck::new(
            name,
            64,
            if monotone { 1.0 } else { 0.0 },
            1.0,
            0.0,
        ));
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dirichlet_values() {
        for n in [0usize, 1, 5, 64] {
            assert_eq!(dirichlet(n, 0.0f64), 1.0);
        }
        // closed form sin(3π/2)/(3 sin(π/2)) = -1/3
        assert_relative_eq!(dirichlet(1, std::f64::consts::PI), -1.0 / 3.0, max_relative = 1e-14);
        // bounded by one on a grid
        for j in 1..200 {
            let x = j as f64 * 0.031;
            assert!(dirichlet(16, x).abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn fejer_peak_and_mass() {
        for m in [1usize, 8, 128] {
            assert_relative_eq!(fejer(m, 0.0f64, Deriv::None), (m + 1) as f64, max_relative = 1e-12);
            let mass = periodic_quadrature(4096, |x: f64| fejer(m, x, Deriv::None))
                / std::f64::consts::TAU;
            assert_relative_eq!(mass, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn derivative_integrals_match_closed_forms() {
        for m in [1usize, 8, 16, 32, 64, 128] {
            let m3 = (m as f64).powi(3);
            let q1 = periodic_quadrature(4096, |x: f64| {
                let d = fejer(m, x, Deriv::First);
                d * d / m3
            });
            assert_relative_eq!(q1, fejer_d1_sq_integral(m), max_relative = 1e-6);
            let m5 = (m as f64).powi(5);
            let q2 = periodic_quadrature(4096, |x: f64| {
                let d = fejer(m, x, Deriv::Second);
                d * d / m5
            });
            assert_relative_eq!(q2, fejer_d2_sq_integral(m), max_relative = 1e-6);
        }
    }

    #[test]
    fn closed_forms_approach_asymptotic_limits() {
        // (2/15)π and (4/105)π; convergence is O(1/M)
        assert_relative_eq!(
            fejer_d1_sq_integral::<f64>(16384),
            2.0 / 15.0 * std::f64::consts::PI,
            max_relative = 1e-3
        );
        assert_relative_eq!(
            fejer_d2_sq_integral::<f64>(16384),
            4.0 / 105.0 * std::f64::consts::PI,
            max_relative = 1e-3
        );
    }

    #[test]
    fn tail_mass_decays_monotonically() {
        let tails: Vec<f64> = [8usize, 16, 32, 64]
            .iter()
            .map(|&m| tail_mass(0.5, 4096, |x: f64| good_kernel_d1(m, x)))
            .collect();
        for w in tails.windows(2) {
            assert!(w[1] < w[0], "tails not decreasing: {tails:?}");
        }
    }

    #[test]
    fn report_passes_for_standard_sizes() {
        let checks = kernels_report(&[1, 8, 16, 32, 64, 128], 1e-6);
        for c in &checks {
            assert!(c.pass, "identity failed: {c:?}");
        }
    }

    #[test]
    fn report_detects_absurd_tolerance() {
        // tolerance semantics: an impossible tolerance must produce failures
        let checks = kernels_report(&[16], 1e-16);
        assert!(checks.iter().any(|c| !c.pass));
    }
}
