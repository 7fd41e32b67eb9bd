//! Closed forms and quadrature oracles in double precision.
//!
//! Everything exponential is evaluated in log space through
//! `cosh s = e^s (1 + e^(-2s)) / 2`, because `d / sqrt(a)` reaches the
//! hundreds and the raw hyperbolic functions overflow long before the
//! quantities of interest do.

use std::f64::consts::{LN_2, PI};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("quadrature did not reach tolerance {tolerance} within {panels} panels (last change {change})")]
    QuadratureTolExceeded {
        tolerance: f64,
        panels: usize,
        change: f64,
    },
    #[error("result lost all precision ({0})")]
    LossOfPrecision(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

type Result<T> = std::result::Result<T, AnalyticError>;

/// Composite Simpson rule with panel doubling until two successive results
/// agree to `tolerance` (relative to the integral of `|f|`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Starting panel count; even and at least 16.
    pub panels: usize,
    /// Log-decay budget for truncating semi-infinite or exponentially
    /// decaying integrands: the integrand is cut where it has fallen by
    /// `e^-truncation` from its running maximum.
    pub truncation: f64,
    pub tolerance: f64,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            panels: 512,
            truncation: 40.0,
            tolerance: 1e-10,
            max_panels: 1 << 22,
        }
    }
}

impl Quadrature {
    pub fn validate(&self) -> Result<()> {
        if self.panels < 16 || !self.panels.is_multiple_of(2) {
            return Err(AnalyticError::InvalidArgument(format!(
                "panel count {} must be even and >= 16",
                self.panels
            )));
        }
        if !(self.truncation >= 37.0) {
            // e^-37 ~ 1e-16
            return Err(AnalyticError::InvalidArgument(
                "truncation budget must leave a tail below 1e-16".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(AnalyticError::InvalidArgument(
                "tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> (f64, f64) {
        let h = (b - a) / n as f64;
        let mut s = 0.0;
        let mut s_abs = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let v = f(a + h * k as f64);
            s += w * v;
            s_abs += w * v.abs();
        }
        (s * h / 3.0, s_abs * h / 3.0)
    }

    /// `int_a^b f`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
        self.validate()?;
        if b == a {
            return Ok(0.0);
        }
        let mut n = self.panels;
        let (mut prev, _) = Self::simpson(&f, a, b, n);
        loop {
            n *= 2;
            let (cur, cur_abs) = Self::simpson(&f, a, b, n);
            let change = (cur - prev).abs();
            if !cur.is_finite() {
                return Err(AnalyticError::LossOfPrecision(
                    "non-finite quadrature".into(),
                ));
            }
            if change <= self.tolerance * cur_abs || cur_abs == 0.0 {
                return Ok(cur);
            }
            if n >= self.max_panels {
                return Err(AnalyticError::QuadratureTolExceeded {
                    tolerance: self.tolerance,
                    panels: n,
                    change,
                });
            }
            prev = cur;
        }
    }

    /// First point past `start` where `log_f` has dropped by the truncation
    /// budget below the largest value seen so far.
    fn decay_cut(&self, log_f: impl Fn(f64) -> f64, start: f64, step: f64) -> f64 {
        let mut t = start;
        let mut peak = log_f(t);
        let mut dt = step;
        for _ in 0..100_000 {
            t += dt;
            let v = log_f(t);
            if v > peak {
                peak = v;
            } else if v < peak - self.truncation {
                return t;
            }
            dt *= 1.02;
        }
        t
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|&t| (t - m).exp()).sum::<f64>().ln()
}

/// `ln cosh(s)` without overflow.
pub fn ln_cosh(s: f64) -> f64 {
    let s = s.abs();
    s + (-2.0 * s).exp().ln_1p() - LN_2
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + k as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `Gamma(x)` for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Closed-form solution of `-a q'' + q = 0` on `(-h, h)` with `q(+-h) = 1`:
/// `cosh(x / sqrt a) / cosh(h / sqrt a)`.
pub fn varadhan_1d(x: f64, h: f64, a: f64) -> f64 {
    log_varadhan_1d(x, h, a).exp()
}

pub fn log_varadhan_1d(x: f64, h: f64, a: f64) -> f64 {
    let s = 1.0 / a.sqrt();
    let x = x.abs();
    (x - h) * s + (-2.0 * x * s).exp().ln_1p() - (-2.0 * h * s).exp().ln_1p()
}

/// Parameters of the 1D power-law example: `Omega = (-h, h)`, `u(+-h) = alpha`,
/// `f = (|x| - k)^zeta` outside `[-k, k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1d {
    pub h: f64,
    pub k: f64,
    pub alpha: f64,
    pub zeta: f64,
}

impl Example1d {
    /// `h = 1, k = 2/3, alpha = 1, zeta = 2`.
    pub fn standard() -> Self {
        Self {
            h: 1.0,
            k: 2.0 / 3.0,
            alpha: 1.0,
            zeta: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0
            && self.k < self.h
            && self.alpha > 0.0
            && self.zeta >= 0.0
            && self.zeta.is_finite())
        {
            return Err(AnalyticError::InvalidArgument(format!(
                "need 0 < k < h, alpha > 0, zeta >= 0: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn source(&self, x: f64) -> f64 {
        let t = x.abs() - self.k;
        if t <= 0.0 {
            0.0
        } else {
            t.powf(self.zeta)
        }
    }

    fn log_pow(&self, t: f64) -> f64 {
        if self.zeta == 0.0 {
            0.0
        } else {
            self.zeta * t.ln()
        }
    }

    /// `J(L) = int_0^L t^zeta e^-t (1 - e^(-2 (L - t))) dt`.
    fn j(&self, l: f64, q: &Quadrature) -> Result<f64> {
        if l <= 0.0 {
            return Ok(0.0);
        }
        let z = self.zeta;
        let cut = q.decay_cut(|t| self.log_pow(t) - t, 0.0, 0.25).min(l);
        q.integrate(
            |t| t.powf(z) * (-t).exp() * -(-2.0 * (l - t)).exp_m1(),
            0.0,
            cut,
        )
    }

    /// `e^(L_x) (J(L_h) - J(L_x))`, assembled from nonnegative pieces.
    fn scaled_j_difference(&self, lx: f64, dl: f64, q: &Quadrature) -> Result<f64> {
        if dl <= 0.0 {
            return Ok(0.0);
        }
        let z = self.zeta;
        // Q(L) = int_0^L (L - w)^zeta e^-w dw, the scaled tail e^L P(L)
        let q_part = if lx > 0.0 {
            let cut = q.truncation.min(lx);
            q.integrate(|w| (lx - w).max(0.0).powf(z) * (-w).exp(), 0.0, cut)?
        } else {
            0.0
        };
        let w_cut = q.decay_cut(|w| self.log_pow(lx + w) - w, 0.0, 0.25).min(dl);
        let w_part = q.integrate(
            |w| (lx + w).powf(z) * (-w).exp() * -(-2.0 * (dl - w)).exp_m1(),
            0.0,
            w_cut,
        )?;
        Ok(-(-2.0 * dl).exp_m1() * q_part + w_part)
    }
}

/// `ln gamma_a`, the coefficient of `cosh(x / sqrt a)` in the solution of the
/// power-law example.
pub fn log_gamma_a(ex: &Example1d, a: f64, q: &Quadrature) -> Result<f64> {
    ex.validate()?;
    let s = 1.0 / a.sqrt();
    let jh = ex.j((ex.h - ex.k) * s, q)?;
    let source = if jh > 0.0 {
        -ex.k * s - ex.zeta * s.ln() + jh.ln()
    } else {
        f64::NEG_INFINITY
    };
    let boundary = (2.0 * ex.alpha).ln() - ex.h * s;
    Ok(log_sum_exp(&[source, boundary]) - (-2.0 * ex.h * s).exp().ln_1p())
}

/// `gamma_a = (alpha + a^(-1/2) int_0^h f(y) sinh((h - y)/sqrt a) dy) / cosh(h / sqrt a)`.
pub fn gamma_a(ex: &Example1d, a: f64, q: &Quadrature) -> Result<f64> {
    Ok(log_gamma_a(ex, a, q)?.exp())
}

/// Leading small-`a` behaviour `Gamma(1 + zeta) a^(zeta/2) e^(-k / sqrt a)`, in log form.
pub fn log_gamma_a_asymptotic(ex: &Example1d, a: f64) -> f64 {
    ln_gamma(1.0 + ex.zeta) + 0.5 * ex.zeta * a.ln() - ex.k / a.sqrt()
}

/// Solution of the power-law example at a fixed `a`, with the `x`-independent
/// integrals computed once.
#[derive(Debug, Clone, Copy)]
pub struct Example1dProfile {
    ex: Example1d,
    scale: f64,
    log_gamma: f64,
    jh: f64,
    quad: Quadrature,
}

impl Example1dProfile {
    pub fn new(ex: &Example1d, a: f64, q: &Quadrature) -> Result<Self> {
        ex.validate()?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(AnalyticError::InvalidArgument(format!(
                "diffusion must be positive, got {a}"
            )));
        }
        let scale = 1.0 / a.sqrt();
        Ok(Self {
            ex: *ex,
            scale,
            log_gamma: log_gamma_a(ex, a, q)?,
            jh: ex.j((ex.h - ex.k) * scale, q)?,
            quad: *q,
        })
    }

    pub fn log_gamma(&self) -> f64 {
        self.log_gamma
    }

    /// `ln u_a(x)`, even in `x`.
    pub fn log_u(&self, x: f64) -> Result<f64> {
        let ex = &self.ex;
        let x = x.abs();
        if x > ex.h * (1.0 + 1e-12) {
            return Err(AnalyticError::InvalidArgument(format!(
                "|x| = {x} outside [0, h]"
            )));
        }
        let x = x.min(ex.h);
        let s = self.scale;
        let value = if x <= ex.k {
            self.log_gamma + ln_cosh(x * s)
        } else {
            // u = (e^{xs}/2) [e^{-ks} s^{-zeta} (Jdiff + J_h (R - 1)) + 2 alpha e^{-hs} R]
            // with every term nonnegative
            let lx = (x - ex.k) * s;
            let dl = (ex.h - x) * s;
            let prefactor = -ex.k * s - ex.zeta * s.ln();
            let jd = ex.scaled_j_difference(lx, dl, &self.quad)?;
            let t1 = if jd > 0.0 {
                prefactor - lx + jd.ln()
            } else {
                f64::NEG_INFINITY
            };
            let shrink = -(-2.0 * dl).exp_m1();
            let t2 = if self.jh > 0.0 && shrink > 0.0 {
                prefactor + self.jh.ln() - 2.0 * x * s + shrink.ln()
                    - (-2.0 * ex.h * s).exp().ln_1p()
            } else {
                f64::NEG_INFINITY
            };
            let log_r = (-2.0 * x * s).exp().ln_1p() - (-2.0 * ex.h * s).exp().ln_1p();
            let t3 = (2.0 * ex.alpha).ln() - ex.h * s + log_r;
            x * s - LN_2 + log_sum_exp(&[t1, t2, t3])
        };
        if !value.is_finite() {
            return Err(AnalyticError::LossOfPrecision(format!(
                "ln u_a({x}) = {value}"
            )));
        }
        Ok(value)
    }

    pub fn u(&self, x: f64) -> Result<f64> {
        Ok(self.log_u(x)?.exp())
    }
}

/// `ln u_a(x)` for the power-law example, even in `x`.
pub fn log_example1d_solution(x: f64, ex: &Example1d, a: f64, q: &Quadrature) -> Result<f64> {
    Example1dProfile::new(ex, a, q)?.log_u(x)
}

/// `u_a(x) = gamma_a cosh(x/sqrt a) - a^(-1/2) int_0^x f(y) sinh((x - y)/sqrt a) dy`.
pub fn example1d_solution(x: f64, ex: &Example1d, a: f64, q: &Quadrature) -> Result<f64> {
    Ok(log_example1d_solution(x, ex, a, q)?.exp())
}

/// `int_0^pi sin^p(theta) e^(r (|cos theta| - 1)) (1 + e^(-2 r |cos theta|)) / 2 dtheta`,
/// i.e. `e^-r int_0^pi cosh(r cos theta) sin^p theta dtheta`.
fn scaled_cosh_moment(r: f64, p: f64, q: &Quadrature) -> Result<f64> {
    q.integrate(
        |th| {
            let c = th.cos().abs();
            let s = th.sin().max(0.0);
            let sp = if p == 0.0 { 1.0 } else { s.powf(p) };
            sp * (r * (c - 1.0)).exp() * (1.0 + (-2.0 * r * c).exp()) * 0.5
        },
        0.0,
        PI,
    )
}

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 {
        return Err(AnalyticError::InvalidArgument(
            "dimension must be >= 1".into(),
        ));
    }
    Ok(())
}

/// `ln kappa(N, eta, a)` where `kappa` maps the sphere mean of a solution of
/// `a Lap(h) = h` to its center value.
pub fn log_mean_value_kernel(n: usize, eta: f64, a: f64, q: &Quadrature) -> Result<f64> {
    check_dimension(n)?;
    let rho = eta / a.sqrt();
    if n == 1 {
        return Ok(-ln_cosh(rho));
    }
    let p = (n - 2) as f64;
    let num = q.integrate(
        |th| {
            if p == 0.0 {
                1.0
            } else {
                th.sin().max(0.0).powf(p)
            }
        },
        0.0,
        PI,
    )?;
    let den = scaled_cosh_moment(rho, p, q)?;
    Ok(num.ln() - den.ln() - rho)
}

/// Center-value kernel of the mean-value formula for `a Lap(h) = h`:
/// `1 / cosh(eta / sqrt a)` for `N = 1`, otherwise
/// `int sin^(N-2) / int cosh(eta cos(theta) / sqrt a) sin^(N-2)` over `[0, pi]`.
pub fn mean_value_kernel(n: usize, eta: f64, a: f64, q: &Quadrature) -> Result<f64> {
    Ok(log_mean_value_kernel(n, eta, a, q)?.exp())
}

/// `ln(e^-r I_nu(r))` from the integral representation
/// `I_nu(r) = (r/2)^nu / (Gamma(1/2) Gamma(nu + 1/2)) int_0^pi cosh(r cos t) sin^(2 nu) t dt`.
pub fn log_bessel_i_scaled(nu: f64, r: f64, q: &Quadrature) -> Result<f64> {
    if !(nu >= 0.0 && r >= 0.0) {
        return Err(AnalyticError::InvalidArgument(format!(
            "need nu >= 0 and r >= 0, got nu={nu}, r={r}"
        )));
    }
    if r == 0.0 {
        return Ok(if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    let moment = scaled_cosh_moment(r, 2.0 * nu, q)?;
    Ok(nu * (0.5 * r).ln() - 0.5 * PI.ln() - ln_gamma(nu + 0.5) + moment.ln())
}

/// Modified Bessel function of the first kind `I_nu(r)`.
pub fn bessel_i(nu: f64, r: f64, q: &Quadrature) -> Result<f64> {
    Ok((log_bessel_i_scaled(nu, r, q)? + r).exp())
}

/// Center value `(mu eta / 2)^nu S / (Gamma(1 + nu) I_nu(mu eta))` with
/// `mu = a^(-1/2)` and `nu = (N - 2) / 2`. `N = 1` routes to `S / cosh(eta / sqrt a)`.
pub fn mean_value_via_bessel(n: usize, eta: f64, a: f64, mean: f64, q: &Quadrature) -> Result<f64> {
    check_dimension(n)?;
    let rho = eta / a.sqrt();
    if n == 1 {
        return Ok(mean * (-ln_cosh(rho)).exp());
    }
    let nu = (n as f64 - 2.0) / 2.0;
    let log_kernel =
        nu * (0.5 * rho).ln() - ln_gamma(1.0 + nu) - (log_bessel_i_scaled(nu, rho, q)? + rho);
    Ok(mean * log_kernel.exp())
}

/// `ln(z / beta)` for the decaying solution of `a Lap(z) = z` outside a ball
/// of radius `sqrt a`, evaluated at distance `dist >= sqrt a` from its center.
pub fn log_exterior_profile(n: usize, a: f64, dist: f64, q: &Quadrature) -> Result<f64> {
    check_dimension(n)?;
    let sa = a.sqrt();
    if !(dist >= sa * (1.0 - 1e-12)) {
        return Err(AnalyticError::InvalidArgument(format!(
            "dist {dist} inside the tangent ball of radius {sa}"
        )));
    }
    let rho = dist / sa;
    if n == 1 {
        return Ok(-rho);
    }
    let p = (n - 2) as f64;
    let log_sinh = |t: f64| {
        if p == 0.0 {
            0.0
        } else {
            p * t.sinh().max(f64::MIN_POSITIVE).ln()
        }
    };
    // e^(rho) int_0^inf e^(-rho cosh t) sinh^p t dt
    let scaled = |rho: f64| -> Result<f64> {
        let cut = q.decay_cut(|t| log_sinh(t) - rho * (t.cosh() - 1.0), 0.0, 0.01);
        q.integrate(
            |t| {
                let sp = if p == 0.0 { 1.0 } else { t.sinh().powf(p) };
                sp * (-rho * (t.cosh() - 1.0)).exp()
            },
            0.0,
            cut,
        )
    };
    let num = scaled(rho)?;
    let den = scaled(1.0)?;
    Ok(num.ln() - rho - (den.ln() - 1.0))
}

/// `z(dist) = beta * int e^(-dist cosh t / sqrt a) sinh^(N-2) t / int e^(-cosh t) sinh^(N-2) t`
/// for `N >= 2`, `beta e^(-dist / sqrt a)` for `N = 1`.
pub fn exterior_solution(n: usize, a: f64, beta: f64, dist: f64, q: &Quadrature) -> Result<f64> {
    Ok(beta * log_exterior_profile(n, a, dist, q)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Quadrature {
        Quadrature::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_exact_values() {
        for (x, want) in [
            (1.0, 1.0),
            (2.0, 1.0),
            (3.0, 2.0),
            (5.0, 24.0),
            (7.0, 720.0),
        ] {
            assert!(rel(gamma(x), want) < 1e-12, "Gamma({x})");
        }
        let sqrt_pi = PI.sqrt();
        for (x, want) in [
            (0.5, sqrt_pi),
            (1.5, sqrt_pi / 2.0),
            (2.5, 0.75 * sqrt_pi),
            (3.5, 1.875 * sqrt_pi),
        ] {
            assert!(rel(gamma(x), want) < 1e-12, "Gamma({x})");
        }
    }

    #[test]
    fn varadhan_values() {
        assert!((varadhan_1d(1.0, 1.0, 0.01) - 1.0).abs() < 1e-15);
        assert!((varadhan_1d(-1.0, 1.0, 0.01) - 1.0).abs() < 1e-15);
        let want = 2.0 * (-10f64).exp() / (1.0 + (-20f64).exp());
        assert!(rel(varadhan_1d(0.0, 1.0, 0.01), want) < 1e-13);
        assert!((want - 9.0799859e-5).abs() < 1e-12);
        let a: f64 = 1e-4;
        let d = -a.sqrt() * log_varadhan_1d(0.0, 1.0, a);
        // d = 1 - sqrt(a) ln 2 up to e^(-2/sqrt a)
        assert!((d - (1.0 - a.sqrt() * LN_2)).abs() < 1e-12);
    }

    #[test]
    fn gamma_a_zeta0_matches_closed_form() {
        // J(L) = (1 - e^-L)^2 for zeta = 0
        let ex = Example1d {
            h: 1.0,
            k: 2.0 / 3.0,
            alpha: 1.0,
            zeta: 0.0,
        };
        for a in [1e-1, 1e-2, 1e-3] {
            let s = 1.0 / f64::sqrt(a);
            let l = (ex.h - ex.k) * s;
            let j = (-(-l).exp_m1()).powi(2);
            let want = (2.0 * ex.alpha * (-ex.h * s).exp() + (-ex.k * s).exp() * j)
                / (1.0 + (-2.0 * ex.h * s).exp());
            let got = gamma_a(&ex, a, &q()).unwrap();
            assert!(rel(got, want) < 1e-10, "a={a}: {got} vs {want}");
        }
    }

    #[test]
    fn gamma_a_asymptotics() {
        let ex = Example1d::standard();
        let a = 1e-4;
        let ratio = (log_gamma_a(&ex, a, &q()).unwrap() - log_gamma_a_asymptotic(&ex, a)).exp();
        assert!((0.9..=1.1).contains(&ratio), "{ratio}");
        // both summands positive
        let g1 = gamma_a(&ex, 1.0, &q()).unwrap();
        assert!(g1 >= ex.alpha / 1f64.cosh());
    }

    #[test]
    fn example_solution_boundary_and_center() {
        let ex = Example1d::standard();
        for a in [1e-2, 1e-3, 1e-4] {
            let at_h = example1d_solution(1.0, &ex, a, &q()).unwrap();
            assert!((at_h - 1.0).abs() < 1e-8, "a={a}: {at_h}");
            let at_0 = log_example1d_solution(0.0, &ex, a, &q()).unwrap();
            assert!((at_0 - log_gamma_a(&ex, a, &q()).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn example_solution_satisfies_ode() {
        let quad = Quadrature {
            panels: 4096,
            ..Quadrature::default()
        };
        for ex in [
            Example1d::standard(),
            Example1d {
                zeta: 0.0,
                ..Example1d::standard()
            },
        ] {
            for a in [1e-2, 1e-3, 1e-4] {
                let delta = 1e-3 * f64::sqrt(a);
                let profile = Example1dProfile::new(&ex, a, &quad).unwrap();
                let u = |x: f64| profile.u(x).unwrap();
                let mut worst = 0.0f64;
                for i in 1..=100 {
                    let x = ex.h * i as f64 / 101.0;
                    if (x - ex.k).abs() < 4.0 * delta {
                        continue;
                    }
                    let lap = (u(x + delta) - 2.0 * u(x) + u(x - delta)) / (delta * delta);
                    let r = -a * lap + u(x) - ex.source(x);
                    worst = worst.max(r.abs());
                }
                assert!(worst <= 1e-6, "zeta={} a={a}: residual {worst}", ex.zeta);
            }
        }
    }

    #[test]
    fn kernel_in_one_dimension() {
        let k = mean_value_kernel(1, 0.3, 0.01, &q()).unwrap();
        assert!(rel(k, 1.0 / 3f64.cosh()) < 1e-14);
        let small = mean_value_kernel(2, 1e-4, 1.0, &q()).unwrap();
        assert!((small - 1.0).abs() < 1e-8);
    }

    #[test]
    fn kernel_three_dimensions_closed_form() {
        // kappa = rho / sinh(rho) for N = 3
        for rho in [0.5, 1.0, 5.0] {
            let a = 0.01;
            let k = mean_value_kernel(3, rho * f64::sqrt(a), a, &q()).unwrap();
            assert!(rel(k, rho / rho.sinh()) < 1e-9, "rho={rho}");
        }
    }

    #[test]
    fn bessel_values() {
        assert!((bessel_i(0.0, 0.0, &q()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(bessel_i(1.0, 0.0, &q()).unwrap(), 0.0);
        for r in [0.5, 1.0, 5.0] {
            let want = (2.0 / (PI * r)).sqrt() * f64::sinh(r);
            assert!(rel(bessel_i(0.5, r, &q()).unwrap(), want) < 1e-10, "r={r}");
        }
    }

    #[test]
    fn exterior_profile() {
        let a: f64 = 0.01;
        let sa = a.sqrt();
        assert!(
            rel(
                exterior_solution(1, a, 2.0, sa, &q()).unwrap(),
                2.0 * (-1f64).exp()
            ) < 1e-15
        );
        assert!(rel(exterior_solution(2, a, 1.5, sa, &q()).unwrap(), 1.5) < 1e-12);
        assert!(rel(exterior_solution(3, a, 1.0, sa, &q()).unwrap(), 1.0) < 1e-12);
        let z = exterior_solution(2, a, 1.0, 0.3, &q()).unwrap();
        let d = -sa * z.ln();
        assert!(d >= 0.3 * (1.0 - a) - 0.05 && d <= 0.3 + 0.05, "{d}");
        // N = 3: z = beta sqrt(a) e^{-(dist - sqrt a)/sqrt a} / dist
        let z3 = exterior_solution(3, a, 1.0, 0.3, &q()).unwrap();
        assert!(rel(z3, sa / 0.3 * (-(0.3 - sa) / sa).exp()) < 1e-10);
        assert!(exterior_solution(2, a, 1.0, 0.05, &q()).is_err());
    }

    #[test]
    fn exterior_profile_is_decreasing_and_log_convex() {
        let a = 0.01;
        for n in [1, 2, 3] {
            let dists: Vec<f64> = (0..40).map(|i| 0.1 + 0.02 * i as f64).collect();
            let logs: Vec<f64> = dists
                .iter()
                .map(|&d| log_exterior_profile(n, a, d, &q()).unwrap())
                .collect();
            for w in logs.windows(2) {
                assert!(w[1] < w[0]);
            }
            for w in logs.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9, "N={n}");
            }
        }
    }

    #[test]
    fn quadrature_validation() {
        assert!(Quadrature {
            panels: 15,
            ..Quadrature::default()
        }
        .validate()
        .is_err());
        assert!(Quadrature {
            truncation: 10.0,
            ..Quadrature::default()
        }
        .validate()
        .is_err());
        let tiny = Quadrature {
            max_panels: 64,
            tolerance: 1e-15,
            panels: 16,
            ..Quadrature::default()
        };
        assert!(matches!(
            tiny.integrate(|x: f64| x.sqrt(), 0.0, 1.0),
            Err(AnalyticError::QuadratureTolExceeded { .. })
        ));
    }
}
