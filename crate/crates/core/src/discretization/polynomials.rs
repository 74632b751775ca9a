//! Orthonormal Jacobi/Legendre polynomials and Gauss-type point sets on [-1, 1].

use std::f64::consts::PI;

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Values of the L²([-1,1], (1-x)^a (1+x)^b)-orthonormal Jacobi polynomials
/// of degrees `0..=nmax` at `x`. `a` and `b` are non-negative integers.
pub fn jacobi_all(nmax: usize, a: u32, b: u32, x: f64) -> Vec<f64> {
    let (af, bf) = (a as f64, b as f64);
    let gamma0 = 2f64.powi((a + b + 1) as i32) / (af + bf + 1.0) * factorial(a) * factorial(b)
        / factorial(a + b);
    let mut p = Vec::with_capacity(nmax + 1);
    p.push(1.0 / gamma0.sqrt());
    if nmax == 0 {
        return p;
    }
    let gamma1 = (af + 1.0) * (bf + 1.0) / (af + bf + 3.0) * gamma0;
    p.push(((af + bf + 2.0) * x / 2.0 + (af - bf) / 2.0) / gamma1.sqrt());
    let mut aold = 2.0 / (2.0 + af + bf) * ((af + 1.0) * (bf + 1.0) / (af + bf + 3.0)).sqrt();
    for i in 1..nmax {
        let fi = i as f64;
        let h1 = 2.0 * fi + af + bf;
        let anew = 2.0 / (h1 + 2.0)
            * ((fi + 1.0) * (fi + 1.0 + af + bf) * (fi + 1.0 + af) * (fi + 1.0 + bf)
                / (h1 + 1.0)
                / (h1 + 3.0))
                .sqrt();
        let bnew = -(af * af - bf * bf) / h1 / (h1 + 2.0);
        let next = (-aold * p[i - 1] + (x - bnew) * p[i]) / anew;
        p.push(next);
        aold = anew;
    }
    p
}

/// Derivatives of the orthonormal Jacobi polynomials of degrees `0..=nmax`.
pub fn jacobi_grad_all(nmax: usize, a: u32, b: u32, x: f64) -> Vec<f64> {
    let mut d = vec![0.0; nmax + 1];
    if nmax == 0 {
        return d;
    }
    let shifted = jacobi_all(nmax - 1, a + 1, b + 1, x);
    for n in 1..=nmax {
        let fnn = n as f64;
        d[n] = (fnn * (fnn + (a + b) as f64 + 1.0)).sqrt() * shifted[n - 1];
    }
    d
}

/// Orthonormal Legendre values and derivatives of degrees `0..=nmax`.
pub fn legendre_with_derivatives(nmax: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    (jacobi_all(nmax, 0, 0, x), jacobi_grad_all(nmax, 0, 0, x))
}

/// Gauss–Legendre points and weights with `n` points, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // classical three-term recurrence for P_n and its derivative
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Gauss–Lobatto–Legendre nodes with `n` points (endpoints included), ascending.
/// A single point is the midpoint.
pub fn gauss_lobatto(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![0.0];
    }
    let nd = n - 1;
    let mut x: Vec<f64> = (0..n).map(|i| (PI * i as f64 / nd as f64).cos()).collect();
    for xi in x.iter_mut() {
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, *xi);
            for k in 2..=nd {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * *xi * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pnm1) = if nd == 1 { (*xi, 1.0) } else { (p1, p0) };
            let dx = (*xi * pn - pnm1) / (n as f64 * pn);
            *xi -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
    }
    x.reverse();
    x[0] = -1.0;
    x[nd] = 1.0;
    x
}
