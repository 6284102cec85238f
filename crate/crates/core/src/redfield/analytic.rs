//! Closed-form spectra and transformations for coherence orders 2..=7.
//!
//! Eigenvalues come in the closed-form index order k = 1..; the matching
//! eigensystems keep that order rather than the canonical numeric one.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;

use super::eigen::BlockEigensystem;
use crate::error::{Error, Result};
use crate::phys_params::{QuadrupolarConstant, SpectralDensities};

fn s(x: f64) -> f64 {
    x.sqrt()
}

fn check_order(q: usize) -> Result<()> {
    if (2..=7).contains(&q) {
        Ok(())
    } else {
        Err(Error::CoherenceOrder(q as i32))
    }
}

fn guard(q: usize, value: f64, scale: f64, what: &str) -> Result<()> {
    if value.abs() <= 1e-12 * scale || !value.is_finite() {
        return Err(Error::DegenerateSpectrum { q, detail: format!("{what} = {value:e}") });
    }
    Ok(())
}

/// Root of x^3 - alpha x^2 + beta x - gamma selected by the principal cube
/// roots in the Cardano form.
fn cardano(alpha: f64, beta: f64, gamma: f64) -> f64 {
    let disc = alpha.powi(3) * gamma / 27.0 - alpha * alpha * beta * beta / 108.0 - alpha * beta * gamma / 6.0
        + beta.powi(3) / 27.0
        + gamma * gamma / 4.0;
    let base = -alpha.powi(3) / 27.0 + beta * alpha / 6.0 - gamma / 2.0;
    if disc >= 0.0 {
        let r = disc.sqrt();
        alpha / 3.0 - (base + r).cbrt() - (base - r).cbrt()
    } else {
        let r = Complex64::new(0.0, (-disc).sqrt());
        let b = Complex64::new(base, 0.0);
        (Complex64::new(alpha / 3.0, 0.0) - (b + r).powf(1.0 / 3.0) - (b - r).powf(1.0 / 3.0)).re
    }
}

/// The two remaining roots given one root `lambda` of the cubic.
fn iota_varsigma(alpha: f64, gamma: f64, lambda: f64) -> (f64, f64) {
    let h = (lambda - alpha) / 2.0;
    let rad = (h * h - gamma / lambda).max(0.0).sqrt();
    (-h + rad, -h - rad)
}

struct Cubic {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl Cubic {
    fn roots(&self) -> (f64, f64, f64) {
        let l = cardano(self.alpha, self.beta, self.gamma);
        let (i, v) = iota_varsigma(self.alpha, self.gamma, l);
        (i, l, v)
    }
}

fn cubic_q3(j: [f64; 3]) -> Cubic {
    let [j0, j1, j2] = j;
    Cubic {
        gamma: -6804.0 * j0 * j0 * j1 - 8748.0 * j0 * j0 * j2 - 12573.0 * j0 * j1 * j1 - 35100.0 * j0 * j1 * j2
            - 12303.0 * j0 * j2 * j2
            - 3653.0 * j1.powi(3)
            - 16002.0 * j1 * j1 * j2
            - 13947.0 * j1 * j2 * j2
            - 2870.0 * j2.powi(3),
        beta: 324.0 * j0 * j0 + 1818.0 * j0 * j1 + 1764.0 * j0 * j2 + 827.0 * j1 * j1 + 2140.0 * j1 * j2 + 767.0 * j2 * j2,
        alpha: -45.0 * j0 - 55.0 * j1 - 58.0 * j2,
    }
}

fn cubics_q2(j: [f64; 3]) -> (Cubic, Cubic) {
    let [j0, j1, j2] = j;
    let a = Cubic {
        gamma: -225.0 * j0.powi(3) - 4764.0 * j0 * j0 * j1 - 7753.0 * j0 * j0 * j2 - 13188.0 * j0 * j1 * j1
            - 37020.0 * j0 * j1 * j2
            - 15783.0 * j0 * j2 * j2
            - 6048.0 * j1.powi(3)
            - 26292.0 * j1 * j1 * j2
            - 21552.0 * j1 * j2 * j2
            - 4575.0 * j2.powi(3),
        beta: 259.0 * j0 * j0 + 1368.0 * j0 * j1 + 1874.0 * j0 * j2 + 1092.0 * j1 * j1 + 2940.0 * j1 * j2 + 1287.0 * j2 * j2,
        alpha: -35.0 * j0 - 60.0 * j1 - 73.0 * j2,
    };
    let b = Cubic {
        gamma: -225.0 * j0.powi(3) - 2514.0 * j0 * j0 * j1 - 7753.0 * j0 * j0 * j2 - 6048.0 * j0 * j1 * j1
            - 29240.0 * j0 * j1 * j2
            - 15783.0 * j0 * j2 * j2
            - 2688.0 * j1.powi(3)
            - 17472.0 * j1 * j1 * j2
            - 25702.0 * j1 * j2 * j2
            - 4575.0 * j2.powi(3),
        beta: 259.0 * j0 * j0 + 1028.0 * j0 * j1 + 1874.0 * j0 * j2 + 672.0 * j1 * j1 + 2520.0 * j1 * j2 + 1287.0 * j2 * j2,
        alpha: -35.0 * j0 - 50.0 * j1 - 73.0 * j2,
    };
    (a, b)
}

fn q5_radical(j: [f64; 3]) -> f64 {
    let [j0, j1, j2] = j;
    s(625.0 * j0 * j0 - 800.0 * j0 * j1 - 250.0 * j0 * j2 + 2944.0 * j1 * j1 + 160.0 * j1 * j2 + 25.0 * j2 * j2)
}

fn q4_radicals(j: [f64; 3]) -> (f64, f64) {
    let [j0, j1, j2] = j;
    (s(256.0 * (j0 - j1).powi(2) + 105.0 * (j1 - j2).powi(2)), s(256.0 * j0 * j0 + 105.0 * (j1 + j2).powi(2)))
}

pub fn analytic_eigenvalues(q: usize, j: &SpectralDensities) -> Result<Vec<f64>> {
    check_order(q)?;
    let ja = j.as_array();
    let [j0, j1, j2] = ja;
    Ok(match q {
        7 => vec![-(21.0 * j1 + 7.0 * j2)],
        6 => vec![-(9.0 * j0 + 8.0 * j1 + 11.0 * j2), -(9.0 * j0 + 50.0 * j1 + 11.0 * j2)],
        5 => {
            let r = q5_radical(ja);
            let m = -12.5 * j0 - 29.0 * j1 - 12.5 * j2;
            vec![m - r / 2.0, -25.0 * j0 - 21.0 * j1 - 24.0 * j2, m + r / 2.0]
        }
        4 => {
            let (r1, r2) = q4_radicals(ja);
            let b = -20.0 * j0 - 29.0 * j1 - 21.0 * j2;
            let c = -20.0 * j0 - 13.0 * j1 - 21.0 * j2;
            vec![b - r1, b + r1, c - r2, c + r2]
        }
        3 => {
            let (i, l, v) = cubic_q3(ja).roots();
            vec![i, -9.0 * j0 - 21.0 * j1 - 40.0 * j2, l, -36.0 * j0 - 13.0 * j1 - 21.0 * j2, v]
        }
        2 => {
            let (a, b) = cubics_q2(ja);
            let (ia, la, va) = a.roots();
            let (ib, lb, vb) = b.roots();
            vec![ia, la, ib, lb, va, vb]
        }
        _ => unreachable!(),
    })
}

fn from_rows<const N: usize>(rows: [[f64; N]; N]) -> DMatrix<f64> {
    DMatrix::from_fn(N, N, |r, c| rows[r][c])
}

fn normalized(q: usize, v: Vector3<f64>, scale: f64) -> Result<Vector3<f64>> {
    let n = v.norm();
    guard(q, n, scale, "eigenvector normalization")?;
    Ok(v / n)
}

pub fn analytic_eigensystem(q: usize, j: &SpectralDensities, c: &QuadrupolarConstant) -> Result<BlockEigensystem> {
    let eigenvalues = analytic_eigenvalues(q, j)?;
    let ja = j.as_array();
    let (w, w_bar) = match q {
        7 => (DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, 1.0)),
        6 => {
            let h = 1.0 / s(2.0);
            let m = from_rows([[-h, h], [h, h]]);
            (m.clone(), m)
        }
        5 => transform_q5(ja)?,
        4 => transform_q4(ja)?,
        3 => transform_q3(ja, &eigenvalues)?,
        2 => transform_q2(ja, &eigenvalues)?,
        _ => unreachable!(),
    };
    let rates = eigenvalues.iter().map(|l| -c.c * l).collect();
    Ok(BlockEigensystem { q, eigenvalues, w, w_bar, rates })
}

fn transform_q5(j: [f64; 3]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let [j0, j1, j2] = j;
    let scale = j0.max(j1).max(j2);
    let r = q5_radical(j);
    guard(5, r, scale, "spectral radical")?;
    let den = 10.0 * s(42.0) * (-5.0 * j0 + 4.0 * j1 + j2);
    guard(5, den, scale, "a/b denominator")?;
    let p = 25.0 * j0 + 656.0 * j1 - 5.0 * j2;
    let a = (p - 13.0 * r) / den;
    let b = (p + 13.0 * r) / den;
    let (na, nb) = (s(a * a + 1.0), s(b * b + 1.0));
    let d = a - b;
    let k = 1.0 / s(26.0);
    let w = from_rows([
        [(s(6.0) - s(7.0) * b) / d * na, -(s(12.0) * b + s(14.0)) / d * na, (s(6.0) - s(7.0) * b) / d * na],
        [-s(13.0), 0.0, s(13.0)],
        [-(s(6.0) - s(7.0) * a) / d * nb, (s(12.0) * a + s(14.0)) / d * nb, -(s(6.0) - s(7.0) * a) / d * nb],
    ]) * k;
    let w_bar = from_rows([
        [(s(7.0) + s(6.0) * a) / na, -s(13.0), (s(7.0) + s(6.0) * b) / nb],
        [(s(12.0) - s(14.0) * a) / na, 0.0, (s(12.0) - s(14.0) * b) / nb],
        [(s(7.0) + s(6.0) * a) / na, s(13.0), (s(7.0) + s(6.0) * b) / nb],
    ]) * k;
    Ok((w, w_bar))
}

fn transform_q4(j: [f64; 3]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let [j0, j1, j2] = j;
    let scale = j0.max(j1).max(j2);
    let (r1, r2) = q4_radicals(j);
    guard(4, j1 - j2, scale, "J1 - J2")?;
    guard(4, r1, scale, "first radical")?;
    let s105 = s(105.0);
    let a1 = (16.0 * j0 - 16.0 * j1 + r1) / (s105 * (j1 - j2));
    let b1 = (16.0 * j0 - 16.0 * j1 - r1) / (s105 * (j1 - j2));
    let a2 = (-16.0 * j0 + r2) / (s105 * (j1 + j2));
    let b2 = (-16.0 * j0 - r2) / (s105 * (j1 + j2));
    let [na1, nb1, na2, nb2] = [a1, b1, a2, b2].map(|x| s(x * x + 1.0));
    let (d1, d2) = (a1 - b1, a2 - b2);
    let h = 1.0 / s(2.0);
    let w = from_rows([
        [na1 / d1, -b1 * na1 / d1, -b1 * na1 / d1, na1 / d1],
        [-nb1 / d1, a1 * nb1 / d1, a1 * nb1 / d1, -nb1 / d1],
        [b2 * na2 / d2, -na2 / d2, na2 / d2, -b2 * na2 / d2],
        [-a2 * nb2 / d2, nb2 / d2, -nb2 / d2, a2 * nb2 / d2],
    ]) * h;
    let w_bar = from_rows([
        [a1 / na1, b1 / nb1, -1.0 / na2, -1.0 / nb2],
        [1.0 / na1, 1.0 / nb1, -a2 / na2, -b2 / nb2],
        [1.0 / na1, 1.0 / nb1, a2 / na2, b2 / nb2],
        [a1 / na1, b1 / nb1, 1.0 / na2, 1.0 / nb2],
    ]) * h;
    Ok((w, w_bar))
}

fn transform_q3(j: [f64; 3], ev: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let [j0, j1, j2] = j;
    let scale = j0.max(j1).max(j2);
    let xi1 = -12.0 * j0 - 29.0 * j1 - 9.0 * j2;
    let xi3 = (-90.0 * j0 - 113.0 * j1 - 161.0 * j2) / 13.0;
    let xi4 = s(208.0 / 11.0) * (-3.0 * j0 + 2.0 * j1 + j2);
    let xi5 = -s(210.0 / 1859.0) * (27.0 * j0 + 4.0 * j1 - 31.0 * j2);
    let r = |l: f64| {
        normalized(3, Vector3::new(xi4 * (l - xi3), (l - xi1) * (l - xi3), xi5 * (l - xi1)), scale * scale)
    };
    let (r1, r3, r5) = (r(ev[0])?, r(ev[2])?, r(ev[4])?);
    let c1 = Vector3::new(s(462.0) / 66.0, s(546.0) / 39.0, s(715.0) / 143.0);
    let c2 = Vector3::new(s(264.0) / 33.0, -s(78.0) / 78.0, -s(5005.0) / 143.0);
    let c3 = Vector3::new(s(330.0) / 33.0, -s(390.0) / 39.0, s(9009.0) / 143.0);
    let col = |v: &Vector3<f64>| [c1.dot(v), c2.dot(v), c3.dot(v), c2.dot(v), c1.dot(v)];
    let h = 1.0 / s(2.0);
    let cols = [col(&r1), [0.0, -h, 0.0, h, 0.0], col(&r3), [-h, 0.0, 0.0, 0.0, h], col(&r5)];
    let w_bar = DMatrix::from_fn(5, 5, |row, k| cols[k][row]);

    let (x1, y1, z1) = (r1.x, r1.y, r1.z);
    let (x3, y3, z3) = (r3.x, r3.y, r3.z);
    let (x5, y5, z5) = (r5.x, r5.y, r5.z);
    let det = Matrix3::from_rows(&[r1.transpose(), r3.transpose(), r5.transpose()]).determinant();
    guard(3, det, 1.0, "cartesian determinant")?;
    let dd = s(858.0) * (x5 * y1 * z3 - x5 * y3 * z1 - y5 * x1 * z3 + y5 * x3 * z1 + z5 * x1 * y3 - z5 * x3 * y1);
    let (s91, s30, s77, s13, s11, s210, s42, s65, s55) =
        (s(91.0), s(30.0), s(77.0), s(13.0), s(11.0), s(210.0), s(42.0), s(65.0), s(55.0));
    let row1 = [
        s91 * (z5 * y3 - y5 * z3) + s30 * (y5 * x3 - x5 * y3) + 2.0 * s77 * (x5 * z3 - z5 * x3),
        -4.0 * s13 * (y5 * z3 - z5 * y3) - s11 * (x5 * z3 - z5 * x3) + s210 * (x5 * y3 - y5 * x3),
        -3.0 * s42 * (x5 * y3 - y5 * x3) - 2.0 * s65 * (y5 * z3 - z5 * y3) - 2.0 * s55 * (x5 * z3 - z5 * x3),
        s210 * (x5 * y3 - y5 * x3) - 4.0 * s13 * (y5 * z3 - z5 * y3) - s11 * (x5 * z3 - z5 * x3),
        -s30 * (x5 * y3 - y5 * x3) - s91 * (y5 * z3 - z5 * y3) + 2.0 * s77 * (x5 * z3 - z5 * x3),
    ];
    let row3 = [
        s91 * (y5 * z1 - z5 * y1) + s30 * (x5 * y1 - y5 * x1) + 2.0 * s77 * (z5 * x1 - x5 * z1),
        s11 * (x5 * z1 - z5 * x1) + 4.0 * s13 * (y5 * z1 - z5 * y1) - s210 * (x5 * y1 - y5 * x1),
        3.0 * s42 * (x5 * y1 - y5 * x1) + 2.0 * s65 * (y5 * z1 - z5 * y1) + 2.0 * s55 * (x5 * z1 - z5 * x1),
        s11 * (x5 * z1 - z5 * x1) + 4.0 * s13 * (y5 * z1 - z5 * y1) - s210 * (x5 * y1 - y5 * x1),
        s91 * (y5 * z1 - z5 * y1) + s30 * (x5 * y1 - y5 * x1) - 2.0 * s77 * (x5 * z1 - z5 * x1),
    ];
    let row5 = [
        s91 * (y1 * z3 - y3 * z1) + s30 * (x1 * y3 - x3 * y1) + 2.0 * s77 * (x3 * z1 - x1 * z3),
        s11 * (x1 * z3 - x3 * z1) + 4.0 * s13 * (y1 * z3 - y3 * z1) - s210 * (x1 * y3 - x3 * y1),
        3.0 * s42 * (x1 * y3 - x3 * y1) + 2.0 * s65 * (y1 * z3 - y3 * z1) + 2.0 * s55 * (x1 * z3 - x3 * z1),
        s11 * (x1 * z3 - x3 * z1) + 4.0 * s13 * (y1 * z3 - y3 * z1) - s210 * (x1 * y3 - x3 * y1),
        s91 * (y1 * z3 - y3 * z1) + s30 * (x1 * y3 - x3 * y1) - 2.0 * s77 * (x1 * z3 - x3 * z1),
    ];
    let rows = [row1.map(|v| v / dd), [0.0, -h, 0.0, h, 0.0], row3.map(|v| v / dd), [-h, 0.0, 0.0, 0.0, h], row5.map(|v| v / dd)];
    Ok((from_rows(rows), w_bar))
}

fn u2() -> DMatrix<f64> {
    from_rows([
        [s(5.0 / 66.0), -s(21.0 / 66.0), s(7.0 / 66.0), s(7.0 / 66.0), -s(21.0 / 66.0), s(5.0 / 66.0)],
        [s(3.0) / 6.0, s(35.0) / 14.0, s(105.0) / 21.0, s(105.0) / 21.0, s(35.0) / 14.0, s(3.0) / 6.0],
        [-s(1155.0) / 66.0, -s(99.0) / 22.0, -s(33.0) / 33.0, s(33.0) / 33.0, s(99.0) / 22.0, s(1155.0) / 66.0],
        [-s(3.0 / 286.0), s(35.0 / 286.0), -s(105.0 / 286.0), s(105.0 / 286.0), -s(35.0 / 286.0), s(3.0 / 286.0)],
        [
            s(15.0) / (2.0 * s(11.0)),
            s(77.0) / 154.0,
            -2.0 * s(231.0) / 77.0,
            -2.0 * s(231.0) / 77.0,
            s(77.0) / 154.0,
            s(15.0) / (2.0 * s(11.0)),
        ],
        [-s(35.0) / (2.0 * s(39.0)), s(117.0) / 26.0, 2.0 / s(39.0), -2.0 / s(39.0), -s(117.0) / 26.0, s(1365.0) / 78.0],
    ])
}

fn u2_bar() -> DMatrix<f64> {
    let (a, b, c, d, e, f) = (s(12.0), s(132.0), s(286.0), s(7.0) * s(44.0), s(156.0), s(66.0));
    from_rows([
        [s(5.0) / f, 1.0 / a, -s(35.0) / b, -s(3.0) / c, s(105.0) / d, -s(35.0) / e],
        [-s(21.0) / f, s(15.0) / (s(7.0) * a), -3.0 * s(3.0) / b, s(35.0) / c, 1.0 / d, 3.0 * s(3.0) / e],
        [s(7.0) / f, 2.0 * s(5.0) / (s(7.0) * a), -2.0 / b, -s(105.0) / c, -4.0 * s(3.0) / d, 4.0 / e],
        [s(7.0) / f, 2.0 * s(5.0) / (s(7.0) * a), 2.0 / b, s(105.0) / c, -4.0 * s(3.0) / d, -4.0 / e],
        [-s(21.0) / f, s(15.0) / (s(7.0) * a), 3.0 * s(3.0) / b, -s(35.0) / c, 1.0 / d, -3.0 * s(3.0) / e],
        [s(5.0) / f, 1.0 / a, s(35.0) / b, s(3.0) / c, s(105.0) / d, s(35.0) / e],
    ])
}

fn transform_q2(j: [f64; 3], ev: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let [j0, j1, j2] = j;
    let scale = j0.max(j1).max(j2);
    let xa = [
        -(107.0 * j0 + 294.0 * j1 + 369.0 * j2) / 11.0,
        -(55.0 * j0 + 102.0 * j1 + 39.0 * j2) / 7.0,
        -56.0 / 11.0 * s(2.0) * (j0 + j1 - 2.0 * j2),
        -4.0 / 7.0 * s(55.0) * (2.0 * j0 - j1 - j2),
    ];
    let xb = [
        -(51.0 * j0 + 32.0 * j1 + 67.0 * j2) / 3.0,
        -(45.0 * j0 + 168.0 * j1 + 151.0 * j2) / 13.0,
        -4.0 / 33.0 * s(143.0) * (6.0 * j0 + j1 - 7.0 * j2),
        -24.0 / 143.0 * s(770.0) * (j0 + 2.0 * j1 - 3.0 * j2),
    ];
    let r = |l: f64, x: &[f64; 4]| {
        let [x1, x2, x4, x5] = *x;
        normalized(2, Vector3::new(x4 * (l - x2), x5 * (l - x1), (l - x1) * (l - x2)), scale * scale)
    };
    // index k = 1..6 -> vector; orders 1, 2, 5 use the first set
    let mut v = [Vector3::zeros(); 7];
    for k in [1, 2, 5] {
        v[k] = r(ev[k - 1], &xa)?;
    }
    for k in [3, 4, 6] {
        v[k] = r(ev[k - 1], &xb)?;
    }
    let (x, y, z) = (|k: usize| v[k].x, |k: usize| v[k].y, |k: usize| v[k].z);
    let m125 = Matrix3::from_rows(&[v[1].transpose(), v[2].transpose(), v[5].transpose()]).determinant();
    let m346 = Matrix3::from_rows(&[v[3].transpose(), v[4].transpose(), v[6].transpose()]).determinant();
    guard(2, m125, 1.0, "M125 determinant")?;
    guard(2, m346, 1.0, "M346 determinant")?;
    let (p, q) = (m125, m346);
    let a = from_rows([
        [(z(5) * y(2) - y(5) * z(2)) / p, (x(5) * z(2) - z(5) * x(2)) / p, 0.0, 0.0, (y(5) * x(2) - x(5) * y(2)) / p, 0.0],
        [(y(5) * z(1) - z(5) * y(1)) / p, (z(5) * x(1) - x(5) * z(1)) / p, 0.0, 0.0, (x(5) * y(1) - y(5) * x(1)) / p, 0.0],
        [0.0, 0.0, (y(4) * z(6) - y(6) * z(4)) / q, (x(6) * z(4) - x(4) * z(6)) / q, 0.0, (x(4) * y(6) - x(6) * y(4)) / q],
        [0.0, 0.0, (z(3) * y(6) - y(3) * z(6)) / q, (x(3) * z(6) - x(6) * z(3)) / q, 0.0, (y(3) * x(6) - x(3) * y(6)) / q],
        [(y(1) * z(2) - y(2) * z(1)) / p, (x(2) * z(1) - x(1) * z(2)) / p, 0.0, 0.0, (x(1) * y(2) - x(2) * y(1)) / p, 0.0],
        [0.0, 0.0, (y(3) * z(4) - y(4) * z(3)) / q, (x(4) * z(3) - x(3) * z(4)) / q, 0.0, (x(3) * y(4) - x(4) * y(3)) / q],
    ]);
    let rmat = from_rows([
        [x(1), x(2), 0.0, 0.0, x(5), 0.0],
        [y(1), y(2), 0.0, 0.0, y(5), 0.0],
        [0.0, 0.0, x(3), x(4), 0.0, x(6)],
        [0.0, 0.0, y(3), y(4), 0.0, y(6)],
        [z(1), z(2), 0.0, 0.0, z(5), 0.0],
        [0.0, 0.0, z(3), z(4), 0.0, z(6)],
    ]);
    Ok((a * u2(), u2_bar() * rmat))
}
