#![allow(dead_code)]

use std::path::PathBuf;

use cgdare::linalg::{pinv, RealMatrix, Tolerance};
use cgdare::PopovTriple;
use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn tol() -> Tolerance {
    Tolerance::default()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn mat(r: usize, c: usize, v: &[f64]) -> RealMatrix {
    RealMatrix::from_row_slice(r, c, v)
}

pub fn diag(v: &[f64]) -> RealMatrix {
    RealMatrix::from_diagonal(&DVector::from_column_slice(v))
}

pub fn max_diff(a: &RealMatrix, b: &RealMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).abs().max()
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("data")
        .join(name)
}

fn zero_s(b: &RealMatrix) -> RealMatrix {
    RealMatrix::zeros(b.nrows(), b.ncols())
}

pub fn example1() -> PopovTriple {
    let b = mat(3, 2, &[0., -1., 3., 0., 0., 0.]);
    let s = zero_s(&b);
    PopovTriple::new(
        mat(3, 3, &[0., -4., 0., 0., 3., 0., 0., 0., -1.]),
        b,
        diag(&[1., 0., 0.]),
        RealMatrix::zeros(2, 2),
        s,
        &tol(),
    )
    .unwrap()
}

pub fn example2() -> PopovTriple {
    let b = mat(3, 2, &[3., -5., 1., 1., 0., 0.]);
    let s = zero_s(&b);
    PopovTriple::new(
        mat(3, 3, &[4., 0., 0., -3., 0., 0., 0., 0., -3.]),
        b,
        diag(&[3., 0., 16.]),
        RealMatrix::zeros(2, 2),
        s,
        &tol(),
    )
    .unwrap()
}

pub fn counterexample() -> PopovTriple {
    let b = mat(3, 1, &[-1., 0., 0.]);
    let s = zero_s(&b);
    PopovTriple::new(
        mat(3, 3, &[0., 2., 0., 2., 2., 0., 0., 0., -5.]),
        b,
        diag(&[0., 0., 24.]),
        RealMatrix::zeros(1, 1),
        s,
        &tol(),
    )
    .unwrap()
}

pub fn scalar(v: f64) -> RealMatrix {
    RealMatrix::from_element(1, 1, v)
}

pub fn scalar_triple(a: f64, b: f64, q: f64, r: f64) -> PopovTriple {
    PopovTriple::new(
        scalar(a),
        scalar(b),
        scalar(q),
        scalar(r),
        scalar(0.0),
        &tol(),
    )
    .unwrap()
}

pub fn random_matrix(rng: &mut StdRng, r: usize, c: usize) -> RealMatrix {
    RealMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

/// Product of random `r×k` and `k×c` factors; rank `k` almost surely.
pub fn random_rank(rng: &mut StdRng, r: usize, c: usize, k: usize) -> RealMatrix {
    random_matrix(rng, r, k) * random_matrix(rng, k, c)
}

pub fn random_orthogonal(rng: &mut StdRng, n: usize) -> RealMatrix {
    random_matrix(rng, n, n).qr().q()
}

pub fn random_symmetric(rng: &mut StdRng, n: usize) -> RealMatrix {
    let m = random_matrix(rng, n, n);
    (&m + m.transpose()) * 0.5
}

/// Rescales `m` to the given spectral radius.
pub fn with_spectral_radius(m: RealMatrix, rho: f64) -> RealMatrix {
    let current = cgdare::linalg::spectral_radius(&m);
    if current == 0.0 {
        m
    } else {
        m * (rho / current)
    }
}

/// Random triple with `Π = [C D]ᵀ[C D]`. `R = DᵀD` is singular when
/// requested, and `A` is built as `A₀ + BR†Sᵀ` from an `A₀` of the requested
/// kind.
pub fn random_triple(
    rng: &mut StdRng,
    n: usize,
    m: usize,
    r_singular: bool,
    a0_singular: bool,
) -> PopovTriple {
    let p = n + m;
    let c = random_matrix(rng, p, n);
    let d = if r_singular {
        let k = rng.gen_range(0..m);
        random_rank(rng, p, m, k)
    } else {
        random_matrix(rng, p, m)
    };
    let q = c.transpose() * &c;
    let s = c.transpose() * &d;
    let r = d.transpose() * &d;
    let a0 = if a0_singular {
        let k = rng.gen_range(0..n);
        random_rank(rng, n, n, k)
    } else {
        random_matrix(rng, n, n) + RealMatrix::identity(n, n) * 0.5
    };
    let b = random_matrix(rng, n, m);
    let a = &a0 + &b * pinv(&r, &tol()) * s.transpose();
    PopovTriple::new(a, b, q, r, s, &tol()).unwrap()
}

pub fn json_matrix(v: &serde_json::Value) -> RealMatrix {
    let rows = v.as_array().unwrap();
    let cols = rows.first().map_or(0, |r| r.as_array().unwrap().len());
    RealMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j].as_f64().unwrap())
}
