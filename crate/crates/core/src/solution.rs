//! Affine solution families `X(ξ) = X₀ + Σᵢ ξᵢ Hᵢ`.

use crate::error::Result;
use crate::linalg::{max_norm, RealMatrix, Tolerance};
use crate::popov::{PopovTriple, Residual};

/// Parameter values at which each free direction of a family is probed.
pub const SAMPLE_POINTS: [f64; 3] = [-1.0, 0.5, 2.0];

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionFamily {
    base: RealMatrix,
    basis: Vec<RealMatrix>,
}

impl SolutionFamily {
    pub fn new(base: RealMatrix, basis: Vec<RealMatrix>) -> Self {
        debug_assert!(basis.iter().all(|h| h.shape() == base.shape()));
        SolutionFamily { base, basis }
    }

    pub fn isolated(x: RealMatrix) -> Self {
        SolutionFamily::new(x, Vec::new())
    }

    pub fn base(&self) -> &RealMatrix {
        &self.base
    }

    pub fn basis(&self) -> &[RealMatrix] {
        &self.basis
    }

    /// Number of free parameters.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_isolated(&self) -> bool {
        self.basis.is_empty()
    }

    /// `X₀ + Σᵢ ξᵢ Hᵢ`; missing trailing parameters are taken as zero.
    pub fn member(&self, xi: &[f64]) -> RealMatrix {
        let mut x = self.base.clone();
        for (h, &t) in self.basis.iter().zip(xi) {
            x += h * t;
        }
        x
    }

    /// The base point plus every parameter direction at each of
    /// [`SAMPLE_POINTS`].
    pub fn sample_parameters(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = vec![vec![0.0; d]];
        for i in 0..d {
            for &t in &SAMPLE_POINTS {
                let mut xi = vec![0.0; d];
                xi[i] = t;
                out.push(xi);
            }
        }
        out
    }

    pub fn samples(&self) -> Vec<RealMatrix> {
        self.sample_parameters()
            .iter()
            .map(|xi| self.member(xi))
            .collect()
    }

    /// Maps base and directions through `f`, which is applied to the base
    /// as an affine map and to each direction through its linear part `g`.
    pub fn map(
        &self,
        f: impl Fn(&RealMatrix) -> RealMatrix,
        g: impl Fn(&RealMatrix) -> RealMatrix,
    ) -> SolutionFamily {
        SolutionFamily::new(f(&self.base), self.basis.iter().map(g).collect())
    }

    /// Residuals of all sampled members on `triple`.
    pub fn verify(&self, triple: &PopovTriple, tol: &Tolerance) -> Result<Vec<Residual>> {
        self.samples()
            .iter()
            .map(|x| triple.gdare_residual(x, tol))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SolutionSet {
    families: Vec<SolutionFamily>,
}

impl SolutionSet {
    pub fn new(families: Vec<SolutionFamily>) -> Self {
        SolutionSet { families }
    }

    pub fn empty() -> Self {
        SolutionSet::default()
    }

    pub fn from_isolated(xs: Vec<RealMatrix>) -> Self {
        SolutionSet::new(xs.into_iter().map(SolutionFamily::isolated).collect())
    }

    pub fn families(&self) -> &[SolutionFamily] {
        &self.families
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    /// Every sampled member of every family.
    pub fn samples(&self) -> Vec<RealMatrix> {
        self.families.iter().flat_map(|f| f.samples()).collect()
    }

    /// Whether some family member equals `x` at its base point, within
    /// `eps` in max-norm. Only base points are compared.
    pub fn contains_base(&self, x: &RealMatrix, eps: f64) -> bool {
        self.families
            .iter()
            .any(|f| f.base.shape() == x.shape() && max_norm(&(&f.base - x)) <= eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_covers_each_direction() {
        let f = SolutionFamily::new(
            RealMatrix::zeros(2, 2),
            vec![RealMatrix::identity(2, 2), RealMatrix::zeros(2, 2)],
        );
        let p = f.sample_parameters();
        assert_eq!(p.len(), 1 + 3 * 2);
        assert_eq!(f.member(&[2.0]), RealMatrix::identity(2, 2) * 2.0);
    }

    #[test]
    fn isolated_family_has_one_sample() {
        let f = SolutionFamily::isolated(RealMatrix::identity(1, 1));
        assert!(f.is_isolated());
        assert_eq!(f.samples(), vec![RealMatrix::identity(1, 1)]);
    }
}
