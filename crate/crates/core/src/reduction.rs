//! Order reduction of a constrained generalized Riccati equation, and
//! reconstruction of its solution set from the reduced equation.
//!
//! Each kernel step rotates the state space so that every solution of the
//! current equation takes the form `X = Q₀ + W·diag(Δ, 0)·Wᵀ`, with `Δ` a
//! solution of a smaller equation of the same kind.

use crate::error::{Error, Result};
use crate::linalg::{
    self, block, kernel_basis_scaled, max_norm, orthonormal_extension, range_basis_scaled,
    spectral_norm, symmetrize, RealMatrix, Tolerance,
};
use crate::popov::PopovTriple;
use crate::solution::SolutionSet;
use crate::solvers::{solve_regular_dare, solve_stein, SteinEquation, SteinStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    CrossElim,
    KernelA0,
    KernelR,
    InputSplit,
}

impl StepKind {
    pub fn name(self) -> &'static str {
        match self {
            StepKind::CrossElim => "CrossElim",
            StepKind::KernelA0 => "KernelA0",
            StepKind::KernelR => "KernelR",
            StepKind::InputSplit => "InputSplit",
        }
    }

    /// Whether the step lowers the state order.
    pub fn is_kernel(self) -> bool {
        matches!(self, StepKind::KernelA0 | StepKind::KernelR)
    }
}

/// Blocks of the rotated `Q₀` that every solution is pinned to.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredBlocks {
    pub q11: RealMatrix,
    pub q12: RealMatrix,
    pub q22: RealMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionStep {
    pub kind: StepKind,
    /// The triple the step was applied to.
    pub input: PopovTriple,
    /// The produced triple; `None` for an input split, whose result is the
    /// terminal equation.
    pub output: Option<PopovTriple>,
    /// `U` or `V`; identity for other kinds.
    pub state_transform: RealMatrix,
    /// `Ω`; identity except for an input split.
    pub input_transform: RealMatrix,
    /// `Q₀` added back when lifting; zero for other kinds.
    pub q_offset: RealMatrix,
    pub blocks: Option<StoredBlocks>,
    pub reduced_order: usize,
    /// `ν` or `η`; zero for other kinds.
    pub removed: usize,
}

impl ReductionStep {
    fn passthrough(kind: StepKind, input: PopovTriple, output: Option<PopovTriple>) -> Self {
        let (n, m) = (input.n(), input.m());
        ReductionStep {
            kind,
            state_transform: RealMatrix::identity(n, n),
            input_transform: RealMatrix::identity(m, m),
            q_offset: RealMatrix::zeros(n, n),
            blocks: None,
            reduced_order: n,
            removed: 0,
            input,
            output,
        }
    }

    /// Solution of the reduced equation from a solution `X` of the input
    /// triple: the leading block of `WᵀXW` minus `Q₁₁`.
    pub fn project_solution(&self, x: &RealMatrix) -> Result<RealMatrix> {
        let blocks = self.kernel_blocks()?;
        let k = self.reduced_order;
        let xw = self.state_transform.transpose() * x * &self.state_transform;
        Ok(symmetrize(&(block(&xw, 0, 0, k, k) - &blocks.q11)))
    }

    /// `X = Q₀ + W·diag(Δ, 0)·Wᵀ`.
    pub fn lift_matrix(&self, delta: &RealMatrix) -> RealMatrix {
        if !self.kind.is_kernel() {
            return delta.clone();
        }
        &self.q_offset + self.embed(delta)
    }

    /// `W·diag(H, 0)·Wᵀ`, the linear part of [`Self::lift_matrix`].
    pub fn embed(&self, h: &RealMatrix) -> RealMatrix {
        if !self.kind.is_kernel() {
            return h.clone();
        }
        let n = self.input.n();
        let k = self.reduced_order;
        let mut padded = RealMatrix::zeros(n, n);
        padded.view_mut((0, 0), (k, k)).copy_from(h);
        let w = &self.state_transform;
        symmetrize(&(w * padded * w.transpose()))
    }

    /// Checks that `WᵀXW` carries `Q₁₂` and `Q₂₂` in its trailing blocks.
    pub fn rigidity_holds(&self, x: &RealMatrix, eps: f64) -> Result<bool> {
        let blocks = self.kernel_blocks()?;
        let (n, k) = (self.input.n(), self.reduced_order);
        let r = n - k;
        let xw = self.state_transform.transpose() * x * &self.state_transform;
        let d12 = max_norm(&(block(&xw, 0, k, k, r) - &blocks.q12));
        let d22 = max_norm(&(block(&xw, k, k, r, r) - &blocks.q22));
        Ok(d12 <= eps && d22 <= eps)
    }

    /// Rotated closed-loop matrix `WᵀA_XW` for a solution `X` of the input
    /// triple.
    pub fn rotated_closed_loop(&self, x: &RealMatrix, tol: &Tolerance) -> Result<RealMatrix> {
        let w = &self.state_transform;
        Ok(w.transpose() * self.input.closed_loop(x, tol)? * w)
    }

    fn kernel_blocks(&self) -> Result<&StoredBlocks> {
        self.blocks
            .as_ref()
            .ok_or_else(|| Error::WrongStepKind(format!("{} stores no Q blocks", self.kind.name())))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TerminalEquation {
    RegularDare(PopovTriple),
    Stein(SteinEquation),
    /// Order zero: nothing is left to solve.
    Empty,
}

impl TerminalEquation {
    pub fn order(&self) -> usize {
        match self {
            TerminalEquation::RegularDare(t) => t.n(),
            TerminalEquation::Stein(eq) => eq.order(),
            TerminalEquation::Empty => 0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TerminalEquation::RegularDare(_) => "RegularDARE",
            TerminalEquation::Stein(_) => "Stein",
            TerminalEquation::Empty => "Empty",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionChain {
    pub original: PopovTriple,
    pub steps: Vec<ReductionStep>,
    pub terminal: TerminalEquation,
}

impl ReductionChain {
    pub fn kernel_steps(&self) -> impl Iterator<Item = &ReductionStep> {
        self.steps.iter().filter(|s| s.kind.is_kernel())
    }

    /// Reduced solutions at every kernel step for a solution `X` of the
    /// original equation, innermost last.
    pub fn project_through(&self, x: &RealMatrix) -> Result<Vec<RealMatrix>> {
        let mut current = x.clone();
        let mut out = Vec::new();
        for step in self.kernel_steps() {
            current = step.project_solution(&current)?;
            out.push(current.clone());
        }
        Ok(out)
    }
}

fn stored_blocks(q_rot: &RealMatrix, k: usize) -> StoredBlocks {
    let n = q_rot.nrows();
    StoredBlocks {
        q11: block(q_rot, 0, 0, k, k),
        q12: block(q_rot, 0, k, k, n - k),
        q22: block(q_rot, k, k, n - k, n - k),
    }
}

/// Reduction along `ker A₀`.
pub fn kernel_a0_step(
    sigma: &PopovTriple,
    tol: &Tolerance,
) -> Result<(ReductionStep, PopovTriple)> {
    let sigma0 = sigma.eliminate_cross(tol);
    let (n, m) = (sigma0.n(), sigma0.m());
    let a0 = sigma0.a();
    let kernel = kernel_basis_scaled(a0, sigma0.scales().state, tol);
    let nu = kernel.ncols();
    if nu == 0 {
        return Err(Error::NotApplicable("A0 is nonsingular".into()));
    }
    let k = n - nu;
    let u = orthonormal_extension(&kernel, tol)?;
    let a_u = u.transpose() * a0 * &u;
    let b_u = u.transpose() * sigma0.b();
    let q_u = symmetrize(&(u.transpose() * sigma0.q() * &u));
    let a_tilde = block(&a_u, 0, 0, n, k);
    let q1 = a_tilde.transpose() * &q_u * &a_tilde;
    let s1 = a_tilde.transpose() * &q_u * &b_u;
    let r1 = sigma0.r() + b_u.transpose() * &q_u * &b_u;
    let a1 = block(&a_tilde, 0, 0, k, k);
    let b1 = block(&b_u, 0, 0, k, m);
    let reduced = PopovTriple::from_parts(a1, b1, q1, r1, s1, Some(sigma0.scales()));
    let step = ReductionStep {
        kind: StepKind::KernelA0,
        state_transform: u,
        input_transform: RealMatrix::identity(m, m),
        q_offset: sigma0.q().clone(),
        blocks: Some(stored_blocks(&q_u, k)),
        reduced_order: k,
        removed: nu,
        output: Some(reduced.clone()),
        input: sigma0,
    };
    Ok((step, reduced))
}

/// `A₀⁻¹B·ker R` as an orthonormal basis, plus the kernel basis of `R`.
fn r_kernel_directions(sigma0: &PopovTriple, tol: &Tolerance) -> Result<(RealMatrix, RealMatrix)> {
    let n = sigma0.n();
    let k_r = kernel_basis_scaled(sigma0.r(), sigma0.scales().cost, tol);
    let a_inv_b = linalg::solve(sigma0.a(), &(sigma0.b() * &k_r))
        .ok_or_else(|| Error::NotApplicable("A0 is singular".into()))?;
    let a_inv = linalg::solve(sigma0.a(), &RealMatrix::identity(n, n))
        .ok_or_else(|| Error::NotApplicable("A0 is singular".into()))?;
    let scale = spectral_norm(&a_inv) * sigma0.scales().input;
    Ok((range_basis_scaled(&a_inv_b, scale, tol), k_r))
}

fn check_cross_free(sigma0: &PopovTriple, tol: &Tolerance) -> Result<()> {
    if sigma0.has_cross_term(tol) {
        return Err(Error::PreconditionViolated(
            "expected a triple with S = 0".into(),
        ));
    }
    Ok(())
}

fn check_r_kernel_preconditions(sigma0: &PopovTriple, tol: &Tolerance) -> Result<()> {
    check_cross_free(sigma0, tol)?;
    if sigma0.a0_singular(tol) {
        return Err(Error::NotApplicable("A0 is singular".into()));
    }
    if !sigma0.r_singular(tol) {
        return Err(Error::NotApplicable("R is nonsingular".into()));
    }
    Ok(())
}

/// Reduction along `A₀⁻¹B·ker R` for a cross-term-free triple with `A₀`
/// nonsingular and `R` singular.
pub fn kernel_r_step(
    sigma0: &PopovTriple,
    tol: &Tolerance,
) -> Result<(ReductionStep, PopovTriple)> {
    check_r_kernel_preconditions(sigma0, tol)?;
    let (n, m) = (sigma0.n(), sigma0.m());
    let (v2, _) = r_kernel_directions(sigma0, tol)?;
    let eta = v2.ncols();
    if eta == 0 {
        return Err(Error::NotApplicable("B ker R = {0}".into()));
    }
    let k = n - eta;
    let v = orthonormal_extension(&v2, tol)?;
    let (a0, b, q0) = (sigma0.a(), sigma0.b(), sigma0.q());
    let a_v = v.transpose() * a0 * &v;
    let b_v = v.transpose() * b;
    let q_v = symmetrize(&(v.transpose() * q0 * &v));
    let aqa = a_v.transpose() * &q_v * &a_v;
    let aqb = a_v.transpose() * &q_v * &b_v;
    let a1 = block(&a_v, 0, 0, k, k);
    let b1 = block(&b_v, 0, 0, k, m);
    let q1 = block(&aqa, 0, 0, k, k);
    let s1 = block(&aqb, 0, 0, k, m);
    let r1 = sigma0.r() + b.transpose() * q0 * b;
    let reduced = PopovTriple::from_parts(a1, b1, q1, r1, s1, Some(sigma0.scales()));
    let step = ReductionStep {
        kind: StepKind::KernelR,
        state_transform: v,
        input_transform: RealMatrix::identity(m, m),
        q_offset: q0.clone(),
        blocks: Some(stored_blocks(&q_v, k)),
        reduced_order: k,
        removed: eta,
        output: Some(reduced.clone()),
        input: sigma0.clone(),
    };
    Ok((step, reduced))
}

/// Splits the input space when `B·ker R = {0}`, leaving a regular DARE in the
/// retained inputs or a Stein equation when no input survives.
pub fn split_input(
    sigma0: &PopovTriple,
    tol: &Tolerance,
) -> Result<(ReductionStep, TerminalEquation)> {
    check_r_kernel_preconditions(sigma0, tol)?;
    let (n, m) = (sigma0.n(), sigma0.m());
    let (directions, k_r) = r_kernel_directions(sigma0, tol)?;
    if directions.ncols() > 0 {
        return Err(Error::NotApplicable("B ker R is nonzero".into()));
    }
    let rank = sigma0.rank_r(tol);
    let stein = |omega: RealMatrix| -> Result<(ReductionStep, TerminalEquation)> {
        let eq = SteinEquation::new(sigma0.a().clone(), sigma0.q().clone(), tol)?;
        let mut step = ReductionStep::passthrough(StepKind::InputSplit, sigma0.clone(), None);
        step.input_transform = omega;
        Ok((step, TerminalEquation::Stein(eq)))
    };
    if rank == 0 {
        return stein(RealMatrix::identity(m, m));
    }
    // Eigenvectors of R ordered by decreasing eigenvalue; the trailing
    // m − rank columns span ker R.
    let eig = linalg::to_faer(sigma0.r())
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::InvariantViolation("symmetric eigensolver failed on R".into()))?;
    let vecs = linalg::from_faer(eig.U());
    let mut omega = RealMatrix::zeros(m, m);
    for c in 0..m {
        omega.set_column(c, &vecs.column(m - 1 - c));
    }
    // Use the canonical kernel basis for the discarded inputs so that the
    // transform is reproducible when R has a repeated zero eigenvalue.
    omega.view_mut((0, rank), (m, m - rank)).copy_from(&k_r);
    let r_rot = symmetrize(&(omega.transpose() * sigma0.r() * &omega));
    let b_rot = sigma0.b() * &omega;
    let r1 = block(&r_rot, 0, 0, rank, rank);
    let b1 = block(&b_rot, 0, 0, n, rank);
    if max_norm(&b1) <= tol.cutoff(n, rank, sigma0.scales().input) {
        return stein(omega);
    }
    let terminal = PopovTriple::from_parts(
        sigma0.a().clone(),
        b1,
        sigma0.q().clone(),
        r1,
        RealMatrix::zeros(n, rank),
        Some(sigma0.scales()),
    );
    let mut step = ReductionStep::passthrough(StepKind::InputSplit, sigma0.clone(), None);
    step.input_transform = omega;
    Ok((step, TerminalEquation::RegularDare(terminal)))
}

/// Applies cross elimination and the kernel steps until a regular DARE, a
/// Stein equation, or an order-zero equation remains.
pub fn reduce(sigma: &PopovTriple, tol: &Tolerance) -> Result<ReductionChain> {
    let mut steps = Vec::new();
    let mut current = sigma.clone();
    let terminal = loop {
        if current.n() == 0 {
            break TerminalEquation::Empty;
        }
        let sigma0 = current.eliminate_cross(tol);
        steps.push(ReductionStep::passthrough(
            StepKind::CrossElim,
            current.clone(),
            Some(sigma0.clone()),
        ));
        if sigma0.a0_singular(tol) {
            let (step, next) = kernel_a0_step(&sigma0, tol)?;
            steps.push(step);
            current = next;
            continue;
        }
        if !sigma0.r_singular(tol) {
            break TerminalEquation::RegularDare(sigma0);
        }
        match kernel_r_step(&sigma0, tol) {
            Ok((step, next)) => {
                steps.push(step);
                current = next;
            }
            Err(Error::NotApplicable(_)) => {
                let (step, terminal) = split_input(&sigma0, tol)?;
                steps.push(step);
                break terminal;
            }
            Err(e) => return Err(e),
        }
    };
    let kernel_steps = steps.iter().filter(|s| s.kind.is_kernel()).count();
    if kernel_steps > sigma.n() {
        return Err(Error::InvariantViolation(format!(
            "{kernel_steps} kernel steps for order {}",
            sigma.n()
        )));
    }
    Ok(ReductionChain {
        original: sigma.clone(),
        steps,
        terminal,
    })
}

/// Outcome of solving the terminal equation.
#[derive(Clone, Debug, PartialEq)]
pub struct TerminalSolution {
    pub solutions: SolutionSet,
    /// Set for a Stein terminal.
    pub stein_status: Option<SteinStatus>,
    /// Set for a regular DARE terminal.
    pub stabilizing: Option<usize>,
    pub exhaustive: bool,
    /// Why the set is empty, when it is.
    pub failure: Option<String>,
}

pub fn solve_terminal(terminal: &TerminalEquation, tol: &Tolerance) -> Result<TerminalSolution> {
    Ok(match terminal {
        TerminalEquation::Empty => TerminalSolution {
            solutions: SolutionSet::from_isolated(vec![RealMatrix::zeros(0, 0)]),
            stein_status: None,
            stabilizing: None,
            exhaustive: true,
            failure: None,
        },
        TerminalEquation::Stein(eq) => {
            let rep = solve_stein(eq, tol);
            let failure = (rep.status == SteinStatus::Inconsistent)
                .then(|| "terminal Stein equation is inconsistent".to_string());
            TerminalSolution {
                solutions: rep.solutions,
                stein_status: Some(rep.status),
                stabilizing: None,
                exhaustive: true,
                failure,
            }
        }
        TerminalEquation::RegularDare(t) => match solve_regular_dare(t, tol) {
            Ok(rep) => TerminalSolution {
                solutions: rep.solutions,
                stein_status: None,
                stabilizing: rep.stabilizing,
                exhaustive: rep.exhaustive,
                failure: None,
            },
            Err(Error::NoRealSolutionFound(msg)) => TerminalSolution {
                solutions: SolutionSet::empty(),
                stein_status: None,
                stabilizing: None,
                exhaustive: true,
                failure: Some(msg),
            },
            Err(e) => return Err(e),
        },
    })
}

/// Maps terminal solutions back to the original equation and verifies every
/// sampled member there.
pub fn lift(
    chain: &ReductionChain,
    terminal: &SolutionSet,
    tol: &Tolerance,
) -> Result<SolutionSet> {
    let mut families = Vec::with_capacity(terminal.len());
    for family in terminal.families() {
        let mut f = family.clone();
        for step in chain.steps.iter().rev().filter(|s| s.kind.is_kernel()) {
            f = f.map(|x| step.lift_matrix(x), |h| step.embed(h));
        }
        if f.base().shape() != (chain.original.n(), chain.original.n()) {
            return Err(Error::InvariantViolation(format!(
                "lifted solution is {}x{} for order {}",
                f.base().nrows(),
                f.base().ncols(),
                chain.original.n()
            )));
        }
        for res in f.verify(&chain.original, tol)? {
            if !res.accepted(tol) {
                return Err(Error::LiftVerificationFailed {
                    residual: res.norm,
                    kernel_ok: res.kernel_ok,
                });
            }
        }
        families.push(f);
    }
    Ok(SolutionSet::new(families))
}

/// Reduction, terminal solution and lifting in one pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Solved {
    pub chain: ReductionChain,
    pub terminal: TerminalSolution,
    pub solutions: SolutionSet,
}

pub fn solve(sigma: &PopovTriple, tol: &Tolerance) -> Result<Solved> {
    let chain = reduce(sigma, tol)?;
    let terminal = solve_terminal(&chain.terminal, tol)?;
    let solutions = lift(&chain, &terminal.solutions, tol)?;
    Ok(Solved {
        chain,
        terminal,
        solutions,
    })
}

/// Checks that `UᵀA_XU = [[A_Δ, 0], [⋆, 0]]` for a solution `X` of the
/// step's input and the corresponding reduced solution `Δ`.
pub fn check_closed_loop_structure(
    step: &ReductionStep,
    x: &RealMatrix,
    delta: &RealMatrix,
    tol: &Tolerance,
) -> Result<bool> {
    if step.kind != StepKind::KernelA0 {
        return Err(Error::WrongStepKind(format!(
            "closed-loop block structure only holds for KernelA0, got {}",
            step.kind.name()
        )));
    }
    let reduced = step
        .output
        .as_ref()
        .ok_or_else(|| Error::InvariantViolation("KernelA0 step without output".into()))?;
    let rotated = step.rotated_closed_loop(x, tol)?;
    let (n, k) = (step.input.n(), step.reduced_order);
    let a_delta = reduced.closed_loop(delta, tol)?;
    let eps = tol.abs_residual * 1.0_f64.max(max_norm(&rotated));
    let right = max_norm(&block(&rotated, 0, k, n, n - k));
    let lead = max_norm(&(block(&rotated, 0, 0, k, k) - a_delta));
    Ok(right <= eps && lead <= eps)
}
