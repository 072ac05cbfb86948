//! Popov triples, quantities derived from a candidate solution, and residual
//! evaluation of the constrained generalized Riccati equation
//!
//! ```text
//! X = AᵀXA − (AᵀXB + S)(R + BᵀXB)†(BᵀXA + Sᵀ) + Q,
//! ker(R + BᵀXB) ⊆ ker(AᵀXB + S).
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, all_finite, assemble, asymmetry, ker_included_scaled, max_norm, pinv_scaled, rank_scaled,
    spectral_norm, symmetrize, RealMatrix, Tolerance,
};

/// Reference magnitudes used for rank decisions on a triple.
///
/// Reduced triples inherit the magnitudes of the triple they were carved out
/// of, so a block that is zero up to rounding is recognised as zero even when
/// its own norm is tiny.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub state: f64,
    pub input: f64,
    pub cost: f64,
}

impl Scales {
    fn merge(self, other: Scales) -> Scales {
        Scales {
            state: self.state.max(other.state),
            input: self.input.max(other.input),
            cost: self.cost.max(other.cost),
        }
    }
}

/// The data `(A, B; Π)` with `Π = [[Q, S], [Sᵀ, R]] ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PopovTriple {
    a: RealMatrix,
    b: RealMatrix,
    q: RealMatrix,
    r: RealMatrix,
    s: RealMatrix,
    scales: Scales,
}

/// Matrices attached to a candidate solution `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct XDerived {
    /// `R + BᵀXB`
    pub r_x: RealMatrix,
    /// `AᵀXB + S`
    pub s_x: RealMatrix,
    /// `I − R_X†R_X`, the orthogonal projector onto `ker R_X`
    pub g_x: RealMatrix,
    /// `R_X†S_Xᵀ`
    pub k_x: RealMatrix,
    /// Closed-loop matrix `A − BK_X`
    pub a_x: RealMatrix,
    /// Reference magnitude for rank decisions on `R_X`
    pub r_x_scale: f64,
}

/// A symmetric matrix offered as a solution.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSolution(RealMatrix);

impl CandidateSolution {
    pub fn new(x: RealMatrix, tol: &Tolerance) -> Result<Self> {
        if !all_finite(&x) {
            return Err(Error::NonFinite("X"));
        }
        if !x.is_square() {
            return Err(Error::NotSquare(format!(
                "X is {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        let asym = asymmetry(&x);
        if asym > tol.abs_residual {
            return Err(Error::AsymmetryBeyondTolerance {
                name: "X",
                asymmetry: asym,
            });
        }
        Ok(CandidateSolution(symmetrize(&x)))
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.0
    }
}

/// Outcome of substituting `X` into the equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    /// Max-norm of `AᵀXA − S_X R_X† S_Xᵀ + Q − X`.
    pub norm: f64,
    /// Whether `ker R_X ⊆ ker S_X` holds.
    pub kernel_ok: bool,
}

impl Residual {
    pub fn accepted(&self, tol: &Tolerance) -> bool {
        self.kernel_ok && self.norm <= tol.abs_residual
    }
}

fn check_shape(name: &str, m: &RealMatrix, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch(format!(
            "{name} is {}x{}, expected {rows}x{cols}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

impl PopovTriple {
    /// Validates and builds a triple. `Q` and `R` are symmetrized after the
    /// asymmetry check.
    pub fn new(
        a: RealMatrix,
        b: RealMatrix,
        q: RealMatrix,
        r: RealMatrix,
        s: RealMatrix,
        tol: &Tolerance,
    ) -> Result<Self> {
        for (name, m) in [("A", &a), ("B", &b), ("Q", &q), ("R", &r), ("S", &s)] {
            if !all_finite(m) {
                return Err(Error::NonFinite(name));
            }
        }
        let n = a.nrows();
        check_shape("A", &a, n, n)?;
        let m = b.ncols();
        check_shape("B", &b, n, m)?;
        check_shape("Q", &q, n, n)?;
        check_shape("R", &r, m, m)?;
        check_shape("S", &s, n, m)?;
        for (name, mat) in [("Q", &q), ("R", &r)] {
            let asym = asymmetry(mat);
            if asym > tol.abs_residual {
                return Err(Error::AsymmetryBeyondTolerance {
                    name,
                    asymmetry: asym,
                });
            }
        }
        let triple = PopovTriple::from_parts(a, b, symmetrize(&q), symmetrize(&r), s, None);
        let min_eig = linalg::min_sym_eigenvalue(&triple.popov_matrix());
        if min_eig < -tol.abs_residual {
            return Err(Error::PopovNotPsd {
                min_eigenvalue: min_eig,
            });
        }
        Ok(triple)
    }

    /// Builds a triple from blocks already known to be consistent, merging
    /// the inherited reference magnitudes.
    pub(crate) fn from_parts(
        a: RealMatrix,
        b: RealMatrix,
        q: RealMatrix,
        r: RealMatrix,
        s: RealMatrix,
        inherited: Option<Scales>,
    ) -> Self {
        let pi = assemble(&[&[&q, &s], &[&s.transpose(), &r]]);
        let own = Scales {
            state: spectral_norm(&a),
            input: spectral_norm(&b),
            cost: spectral_norm(&pi),
        };
        let scales = match inherited {
            Some(s) => own.merge(s),
            None => own,
        };
        PopovTriple {
            a,
            b,
            q: symmetrize(&q),
            r: symmetrize(&r),
            s,
            scales,
        }
    }

    pub fn a(&self) -> &RealMatrix {
        &self.a
    }
    pub fn b(&self) -> &RealMatrix {
        &self.b
    }
    pub fn q(&self) -> &RealMatrix {
        &self.q
    }
    pub fn r(&self) -> &RealMatrix {
        &self.r
    }
    pub fn s(&self) -> &RealMatrix {
        &self.s
    }
    pub fn scales(&self) -> Scales {
        self.scales
    }
    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn popov_matrix(&self) -> RealMatrix {
        assemble(&[&[&self.q, &self.s], &[&self.s.transpose(), &self.r]])
    }

    pub fn r_pinv(&self, tol: &Tolerance) -> RealMatrix {
        pinv_scaled(&self.r, self.scales.cost, tol)
    }

    pub fn rank_r(&self, tol: &Tolerance) -> usize {
        rank_scaled(&self.r, self.scales.cost, tol)
    }

    pub fn r_singular(&self, tol: &Tolerance) -> bool {
        self.rank_r(tol) < self.m()
    }

    pub fn has_cross_term(&self, tol: &Tolerance) -> bool {
        max_norm(&self.s) > tol.cutoff(self.n(), self.m(), self.scales.cost)
    }

    /// `(A₀, Q₀) = (A − BR†Sᵀ, Q − SR†Sᵀ)` together with the reference
    /// magnitude for rank decisions on `A₀`.
    fn cross_eliminated_parts(&self, tol: &Tolerance) -> (RealMatrix, RealMatrix, f64) {
        let rp = self.r_pinv(tol);
        let feedthrough = &self.b * &rp * self.s.transpose();
        let a0 = &self.a - &feedthrough;
        let q0 = symmetrize(&(&self.q - &self.s * &rp * self.s.transpose()));
        let state = self.scales.state.max(spectral_norm(&feedthrough));
        (a0, q0, state)
    }

    /// `A − BR†Sᵀ`.
    pub fn a0(&self, tol: &Tolerance) -> RealMatrix {
        self.cross_eliminated_parts(tol).0
    }

    /// `Σ₀ = (A₀, B; diag(Q₀, R))`, which has the same solutions and the same
    /// closed-loop matrices as `Σ`.
    pub fn eliminate_cross(&self, tol: &Tolerance) -> PopovTriple {
        let (a0, q0, state) = self.cross_eliminated_parts(tol);
        let s0 = RealMatrix::zeros(self.n(), self.m());
        let inherited = Scales {
            state,
            ..self.scales
        };
        PopovTriple::from_parts(a0, self.b.clone(), q0, self.r.clone(), s0, Some(inherited))
    }

    pub fn a0_rank(&self, tol: &Tolerance) -> usize {
        let (a0, _, state) = self.cross_eliminated_parts(tol);
        rank_scaled(&a0, state, tol)
    }

    pub fn a0_singular(&self, tol: &Tolerance) -> bool {
        self.a0_rank(tol) < self.n()
    }

    fn check_x(&self, x: &RealMatrix, tol: &Tolerance) -> Result<()> {
        check_shape("X", x, self.n(), self.n())?;
        if !all_finite(x) {
            return Err(Error::NonFinite("X"));
        }
        let scale = 1.0_f64.max(max_norm(x));
        let asym = asymmetry(x);
        if asym > tol.abs_residual * scale {
            return Err(Error::AsymmetryBeyondTolerance {
                name: "X",
                asymmetry: asym,
            });
        }
        Ok(())
    }

    pub fn derived(&self, x: &RealMatrix, tol: &Tolerance) -> Result<XDerived> {
        self.check_x(x, tol)?;
        let x = symmetrize(x);
        let m = self.m();
        let r_x = symmetrize(&(&self.r + self.b.transpose() * &x * &self.b));
        let s_x = self.a.transpose() * &x * &self.b + &self.s;
        let r_x_scale = self.scales.cost + self.scales.input.powi(2) * spectral_norm(&x);
        let r_x_pinv = pinv_scaled(&r_x, r_x_scale, tol);
        let g_x = RealMatrix::identity(m, m) - &r_x_pinv * &r_x;
        let k_x = &r_x_pinv * s_x.transpose();
        let a_x = &self.a - &self.b * &k_x;
        Ok(XDerived {
            r_x,
            s_x,
            g_x,
            k_x,
            a_x,
            r_x_scale,
        })
    }

    /// Residual norm and kernel condition for a candidate `X`.
    pub fn gdare_residual(&self, x: &RealMatrix, tol: &Tolerance) -> Result<Residual> {
        let d = self.derived(x, tol)?;
        let x = symmetrize(x);
        let res = self.a.transpose() * &x * &self.a - &d.s_x * &d.k_x + &self.q - &x;
        let kernel_ok = ker_included_scaled(&d.r_x, &d.s_x, d.r_x_scale, tol)?;
        Ok(Residual {
            norm: max_norm(&res),
            kernel_ok,
        })
    }

    pub fn accepts(&self, x: &RealMatrix, tol: &Tolerance) -> Result<bool> {
        Ok(self.gdare_residual(x, tol)?.accepted(tol))
    }

    pub fn closed_loop(&self, x: &RealMatrix, tol: &Tolerance) -> Result<RealMatrix> {
        Ok(self.derived(x, tol)?.a_x)
    }

    /// State-space change of coordinates on a cross-term-free triple:
    /// `(T⁻¹A₀T, T⁻¹B; diag(T⁻¹Q₀T, R))`. A solution `X` corresponds to
    /// `T⁻¹XT`; symmetry of the transformed cost requires `T` orthogonal up to
    /// tolerance.
    pub fn transform_state(&self, t: &RealMatrix, tol: &Tolerance) -> Result<PopovTriple> {
        let n = self.n();
        check_shape("T", t, n, n)?;
        if self.has_cross_term(tol) {
            return Err(Error::PreconditionViolated(
                "transform_state expects a triple with S = 0".into(),
            ));
        }
        if linalg::rank(t, tol) < n {
            return Err(Error::SingularTransform);
        }
        let (a_t, b_t, q_t) = if linalg::orthonormality_defect(t) <= tol.abs_residual {
            let tt = t.transpose();
            (&tt * &self.a * t, &tt * &self.b, &tt * &self.q * t)
        } else {
            let solve = |m: &RealMatrix| linalg::solve(t, m).ok_or(Error::SingularTransform);
            (
                solve(&(&self.a * t))?,
                solve(&self.b)?,
                solve(&(&self.q * t))?,
            )
        };
        let asym = asymmetry(&q_t);
        if asym > tol.abs_residual * 1.0_f64.max(max_norm(&q_t)) {
            return Err(Error::AsymmetryBeyondTolerance {
                name: "Q_T",
                asymmetry: asym,
            });
        }
        Ok(PopovTriple::from_parts(
            a_t,
            b_t,
            q_t,
            self.r.clone(),
            self.s.clone(),
            Some(self.scales),
        ))
    }

    /// Orthogonal change of coordinates in the input space:
    /// `(A, BΩ; [[Q, SΩ], [ΩᵀSᵀ, ΩᵀRΩ]])`. Solutions are unchanged.
    pub fn transform_input(&self, omega: &RealMatrix, tol: &Tolerance) -> Result<PopovTriple> {
        let m = self.m();
        check_shape("Ω", omega, m, m)?;
        let defect = linalg::orthonormality_defect(omega);
        if defect > tol.abs_residual {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(PopovTriple::from_parts(
            self.a.clone(),
            &self.b * omega,
            self.q.clone(),
            omega.transpose() * &self.r * omega,
            &self.s * omega,
            Some(self.scales),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kernel_basis;
    use nalgebra::DVector;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn mat(r: usize, c: usize, v: &[f64]) -> RealMatrix {
        RealMatrix::from_row_slice(r, c, v)
    }

    fn diag(v: &[f64]) -> RealMatrix {
        RealMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    fn example1() -> PopovTriple {
        PopovTriple::new(
            mat(3, 3, &[0., -4., 0., 0., 3., 0., 0., 0., -1.]),
            mat(3, 2, &[0., -1., 3., 0., 0., 0.]),
            diag(&[1., 0., 0.]),
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(3, 2),
            &tol(),
        )
        .unwrap()
    }

    fn example2() -> PopovTriple {
        PopovTriple::new(
            mat(3, 3, &[4., 0., 0., -3., 0., 0., 0., 0., -3.]),
            mat(3, 2, &[3., -5., 1., 1., 0., 0.]),
            diag(&[3., 0., 16.]),
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(3, 2),
            &tol(),
        )
        .unwrap()
    }

    fn counterexample() -> PopovTriple {
        PopovTriple::new(
            mat(3, 3, &[0., 2., 0., 2., 2., 0., 0., 0., -5.]),
            mat(3, 1, &[-1., 0., 0.]),
            diag(&[0., 0., 24.]),
            RealMatrix::zeros(1, 1),
            RealMatrix::zeros(3, 1),
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn builds_example_triple() {
        let t = example1();
        assert_eq!((t.n(), t.m()), (3, 2));
    }

    #[test]
    fn zero_triple_is_valid() {
        let z = || RealMatrix::zeros(1, 1);
        assert!(PopovTriple::new(z(), z(), z(), z(), z(), &tol()).is_ok());
    }

    #[test]
    fn rejects_indefinite_popov_matrix() {
        let z = || RealMatrix::zeros(1, 1);
        let err = PopovTriple::new(z(), z(), diag(&[-1.]), z(), z(), &tol()).unwrap_err();
        assert!(
            matches!(err, Error::PopovNotPsd { min_eigenvalue } if (min_eigenvalue + 1.0).abs() < 1e-12)
        );
    }

    #[test]
    fn rejects_bad_shapes_and_asymmetry() {
        let z = |r, c| RealMatrix::zeros(r, c);
        let err = PopovTriple::new(z(2, 2), z(2, 1), z(2, 2), z(1, 1), z(1, 1), &tol());
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
        let err = PopovTriple::new(
            z(2, 2),
            z(2, 1),
            mat(2, 2, &[1., 0.5, 0., 1.]),
            z(1, 1),
            z(2, 1),
            &tol(),
        );
        assert!(matches!(
            err,
            Err(Error::AsymmetryBeyondTolerance { name: "Q", .. })
        ));
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let z = |r, c| RealMatrix::zeros(r, c);
        let t = PopovTriple::new(
            z(2, 2),
            z(2, 1),
            mat(2, 2, &[1., 1e-12, 0., 1.]),
            z(1, 1),
            z(2, 1),
            &tol(),
        )
        .unwrap();
        assert_eq!(asymmetry(t.q()), 0.0);
    }

    #[test]
    fn derived_at_zero_reduces_to_cross_elimination() {
        let t = example2();
        let d = t.derived(&RealMatrix::zeros(3, 3), &tol()).unwrap();
        assert_eq!(d.r_x, *t.r());
        assert!(max_norm(&(d.a_x - t.a0(&tol()))) < 1e-14);
    }

    #[test]
    fn counterexample_closed_loop_equals_a() {
        let t = counterexample();
        let a_x = t.closed_loop(&diag(&[0., 0., -1.]), &tol()).unwrap();
        assert!(max_norm(&(a_x - t.a())) < 1e-14);
    }

    #[test]
    fn projector_identities_on_random_data() {
        // B = [1 1; 0 1; 2 0], X chosen so that R_X is singular
        let b = mat(3, 2, &[1., 1., 0., 1., 2., 0.]);
        let t = PopovTriple::new(
            mat(3, 3, &[0.5, 0.1, 0., 0.2, -0.3, 0.4, 0., 0.7, 0.1]),
            b,
            diag(&[1., 2., 0.]),
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(3, 2),
            &tol(),
        )
        .unwrap();
        let x = diag(&[1., 0., 0.]);
        let d = t.derived(&x, &tol()).unwrap();
        assert!(asymmetry(&d.r_x) == 0.0);
        let g = &d.g_x;
        assert!(max_norm(&(g * g - g)) < 1e-12);
        assert!(asymmetry(g) < 1e-12);
        assert!(max_norm(&(&d.r_x * g)) < 1e-12);
        let rank_g = linalg::rank(g, &tol());
        assert_eq!(rank_g, 2 - linalg::rank(&d.r_x, &tol()));
    }

    #[test]
    fn example_residuals() {
        let t = example1();
        let res = t.gdare_residual(&diag(&[1., 0., 2.]), &tol()).unwrap();
        assert!(res.accepted(&tol()));
        let t2 = example2();
        let res = t2.gdare_residual(&RealMatrix::zeros(3, 3), &tol()).unwrap();
        assert!((res.norm - 16.0).abs() < 1e-12);
        assert!(res.kernel_ok);
        assert!(!res.accepted(&tol()));
        let res = t2.gdare_residual(&diag(&[3., 0., -2.]), &tol()).unwrap();
        assert!(res.norm < 1e-12 && res.kernel_ok);
    }

    #[test]
    fn kernel_condition_is_checked() {
        // Counterexample triple with X = diag(1, 0, -1): R_X = 1, fine; with a
        // perturbed X that zeroes R_X but not S_X the constraint fails.
        let t = counterexample();
        let x = mat(3, 3, &[0., 1., 0., 1., 0., 0., 0., 0., -1.]);
        let d = t.derived(&x, &tol()).unwrap();
        assert_eq!(d.r_x[(0, 0)], 0.0);
        let res = t.gdare_residual(&x, &tol()).unwrap();
        assert!(!res.kernel_ok);
    }

    #[test]
    fn cross_elimination_without_cross_term_is_identity() {
        let t = example1();
        let e = t.eliminate_cross(&tol());
        assert_eq!(e.a(), t.a());
        assert_eq!(e.q(), t.q());
    }

    #[test]
    fn cross_elimination_on_intermediate_example_triple() {
        let t = PopovTriple::new(
            diag(&[4., -3.]),
            mat(2, 2, &[3., -5., 0., 0.]),
            diag(&[48., 144.]),
            mat(2, 2, &[27., -45., -45., 75.]),
            mat(2, 2, &[36., -60., 0., 0.]),
            &tol(),
        )
        .unwrap();
        let e = t.eliminate_cross(&tol());
        assert!(max_norm(&(e.a() - diag(&[0., -3.]))) < 1e-12);
        assert!(max_norm(&(e.q() - diag(&[0., 144.]))) < 1e-12);
        assert!(max_norm(e.s()) == 0.0);
        assert!(linalg::is_psd(e.q(), &tol()).unwrap());
        assert!(t.a0_singular(&tol()));
        let e2 = e.eliminate_cross(&tol());
        assert_eq!(e2.a(), e.a());
        assert_eq!(e2.q(), e.q());
    }

    #[test]
    fn state_transform_identity_and_example() {
        let t = example1();
        let id = t
            .transform_state(&RealMatrix::identity(3, 3), &tol())
            .unwrap();
        assert_eq!(id.a(), t.a());
        assert_eq!(id.b(), t.b());
        let u = mat(3, 3, &[0., 0., 1., -1., 0., 0., 0., 1., 0.]);
        let tu = t.transform_state(&u, &tol()).unwrap();
        assert_eq!(*tu.a(), mat(3, 3, &[3., 0., 0., 0., -1., 0., 4., 0., 0.]));
        assert_eq!(*tu.b(), mat(3, 2, &[-3., 0., 0., 0., 0., -1.]));
        assert_eq!(*tu.q(), diag(&[0., 0., 1.]));
        // last column of U spans ker A
        let k = kernel_basis(t.a(), &tol());
        assert!((k.column(0) - u.column(2)).norm() < 1e-14);
    }

    #[test]
    fn state_transform_rejects_singular() {
        let t = example1();
        assert_eq!(
            t.transform_state(&RealMatrix::zeros(3, 3), &tol()),
            Err(Error::SingularTransform)
        );
    }

    #[test]
    fn candidate_solution_validation() {
        assert!(CandidateSolution::new(mat(2, 2, &[1., 2., 0., 1.]), &tol()).is_err());
        assert!(CandidateSolution::new(RealMatrix::zeros(2, 3), &tol()).is_err());
        let c = CandidateSolution::new(diag(&[1., 2.]), &tol()).unwrap();
        assert_eq!(*c.matrix(), diag(&[1., 2.]));
    }
}
