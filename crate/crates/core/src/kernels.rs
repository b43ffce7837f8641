//! Scalar-generic array kernels.
//!
//! `sinc(x) = sin(πx)/(πx)` and the Dirichlet-style ratio
//! `f(n, x) = sin(nx)/(n sin x)` show up in every matched-filter expression;
//! the complex couplings below are the inner products of half-wavelength ULA
//! steering vectors that the closed forms factor into.

use num_complex::Complex;
use num_traits::{Float, FloatConst, NumCast};

fn pole_guard<T: Float>() -> T {
    NumCast::from(1e-9).unwrap()
}

/// Normalized sinc, `sin(πx)/(πx)`, with the removable singularity filled.
pub fn sinc<T: Float + FloatConst>(x: T) -> T {
    if x.abs() < pole_guard::<T>() {
        T::one()
    } else {
        let px = T::PI() * x;
        px.sin() / px
    }
}

/// Dirichlet ratio `f(n, x) = sin(nx)/(n·sin x)`.
///
/// At the poles `x = kπ` the limit is `(−1)^{k(n−1)}`; `|f| ≤ 1` and `f` is
/// 2π-periodic.
pub fn dirichlet<T: Float + FloatConst>(n: usize, x: T) -> T {
    let pi = T::PI();
    let k = (x / pi).round();
    if (x - k * pi).abs() < pole_guard::<T>() {
        let k = k.to_isize().unwrap_or(0);
        let sign = (k * (n as isize - 1)) % 2;
        if sign == 0 {
            T::one()
        } else {
            -T::one()
        }
    } else {
        let nf: T = NumCast::from(n).unwrap();
        (nf * x).sin() / (nf * x.sin())
    }
}

/// Unit-norm ULA steering vector at half-wavelength spacing:
/// element `i` is `(1/√n)·exp(−jπ·i·cosθ)`.
pub fn steering<T: Float + FloatConst>(theta: T, n: usize) -> Vec<Complex<T>> {
    let nf: T = NumCast::from(n).unwrap();
    let scale = T::one() / nf.sqrt();
    let step = -T::PI() * theta.cos();
    (0..n)
        .map(|i| {
            let phase = step * NumCast::from(i).unwrap();
            Complex::from_polar(scale, phase)
        })
        .collect()
}

/// Beam coupling `h(θa, θb) = a^H(θa)·a(θb)` for an `n`-element ULA, in
/// closed form: `exp(+jπ(n−1)(cosθa−cosθb)/2)·f(n, π(cosθa−cosθb)/2)`.
pub fn beam_coupling<T: Float + FloatConst>(n: usize, theta_a: T, theta_b: T) -> Complex<T> {
    let half = T::one() / (T::one() + T::one());
    let dc = theta_a.cos() - theta_b.cos();
    let arg = T::PI() * half * dc;
    let mag = dirichlet(n, arg);
    let nm1: T = NumCast::from(n - 1).unwrap();
    Complex::from_polar(T::one(), T::PI() * nm1 * half * dc) * mag
}

/// Per-receive-antenna composite factor `g_i(θ; θ0) = √n_rx·b_i(θ)·h(θ, θ0)`
/// with `b` the receive steering vector and `h` the transmit coupling: the
/// per-antenna weight of a path at AoD `θ` under a beam steered to `θ0`.
pub fn rx_path_factor<T: Float + FloatConst>(
    n_tx: usize,
    rx_index: usize,
    theta: T,
    theta0: T,
) -> Complex<T> {
    let idx: T = NumCast::from(rx_index).unwrap();
    let phase = -T::PI() * idx * theta.cos();
    Complex::from_polar(T::one(), phase) * beam_coupling(n_tx, theta, theta0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn sinc_limits() {
        assert_eq!(sinc(0.0f64), 1.0);
        assert_abs_diff_eq!(sinc(0.5f64), 2.0 / std::f64::consts::PI, epsilon = 1e-12);
        assert_abs_diff_eq!(sinc(1.0f64), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn dirichlet_limits_and_direct() {
        assert_eq!(dirichlet(10, 0.0f64), 1.0);
        assert_eq!(dirichlet(10, std::f64::consts::PI), -1.0);
        let direct = (32.0f64 * 0.3).sin() / (32.0 * 0.3f64.sin());
        assert_abs_diff_eq!(dirichlet(32, 0.3f64), direct, epsilon = 1e-12);
    }

    #[test]
    fn dirichlet_bounded_periodic() {
        for i in 0..500 {
            let x = -7.0 + 0.028 * i as f64;
            let f = dirichlet(13, x);
            assert!(f.abs() <= 1.0 + 1e-12);
            assert_abs_diff_eq!(f, dirichlet(13, x + 2.0 * std::f64::consts::PI), epsilon = 1e-9);
        }
    }

    #[test]
    fn steering_norm_and_broadside() {
        let v = steering(std::f64::consts::FRAC_PI_2, 4);
        for e in &v {
            assert_abs_diff_eq!(e.re, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-12);
        }
        for &(theta, n) in &[(0.3, 7usize), (1.2, 32), (2.9, 3), (1.9, 64)] {
            let v = steering(theta, n);
            let norm: f64 = v.iter().map(|e| e.norm_sqr()).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
            for e in &v {
                assert_abs_diff_eq!(e.norm(), 1.0 / (n as f64).sqrt(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn steering_quarter_wave_phase() {
        // cos(π/3) = 1/2 puts the second element at phase −π/2.
        let v = steering(std::f64::consts::FRAC_PI_3, 2);
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert_abs_diff_eq!(v[0].re, inv_sqrt2, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1].im, -inv_sqrt2, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1].re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn coupling_equals_inner_product() {
        for &(a, b, n) in &[(1.43, 1.25, 32usize), (0.7, 2.2, 8), (1.0, 1.0, 16)] {
            let va = steering(a, n);
            let vb = steering(b, n);
            let inner: Complex64 = va.iter().zip(&vb).map(|(x, y)| x.conj() * y).sum();
            let closed = beam_coupling(n, a, b);
            assert_abs_diff_eq!(inner.re, closed.re, epsilon = 1e-10);
            assert_abs_diff_eq!(inner.im, closed.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn rx_factor_matches_components() {
        let (n_tx, n_rx) = (16usize, 8usize);
        let (theta, theta0) = (1.3f64, 1.35f64);
        let b = steering(theta, n_rx);
        for i in 0..n_rx {
            let g = rx_path_factor(n_tx, i, theta, theta0);
            let expect = b[i] * (n_rx as f64).sqrt() * beam_coupling(n_tx, theta, theta0);
            assert_abs_diff_eq!(g.re, expect.re, epsilon = 1e-10);
            assert_abs_diff_eq!(g.im, expect.im, epsilon = 1e-10);
        }
    }
}
