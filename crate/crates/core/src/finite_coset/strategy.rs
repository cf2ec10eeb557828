use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::basis::{finite_bound, CosetBasis, FiniteBound};
use super::group::{GroupTable, Subgroup};
use crate::error::{ensure, Result};
use crate::seed;

const TOL: f64 = 1e-10;
const STREAM_SEESAW: u64 = 0x5ee5a;

type CMat = DMatrix<Complex64>;

/// A coset game `(G, S)` with its coset bases precomputed.
#[derive(Debug, Clone)]
pub struct CosetGame {
    group: GroupTable,
    subgroups: Vec<Subgroup>,
    bases: Vec<CosetBasis>,
}

impl CosetGame {
    pub fn new(group: GroupTable, subgroups: Vec<Subgroup>) -> Result<Self> {
        ensure!(
            !subgroups.is_empty(),
            Domain,
            "a game needs at least one subgroup"
        );
        let bases = subgroups
            .iter()
            .map(|h| CosetBasis::new(&group, h))
            .collect::<Result<Vec<_>>>()?;
        Ok(CosetGame {
            group,
            subgroups,
            bases,
        })
    }

    pub fn group(&self) -> &GroupTable {
        &self.group
    }

    pub fn subgroups(&self) -> &[Subgroup] {
        &self.subgroups
    }

    pub fn bases(&self) -> &[CosetBasis] {
        &self.bases
    }

    pub fn bound(&self) -> Result<FiniteBound> {
        finite_bound(&self.group, &self.subgroups)
    }

    /// Rank-one projector onto basis state `(rep, label)` of subgroup `s`.
    fn projector(&self, s: usize, rep: usize, label: usize) -> CMat {
        let v = self.bases[s].column(rep, label);
        &v * v.adjoint()
    }

    /// Baseline: maximally mixed state and uniform guesses, worth `1/|G|`.
    pub fn uniform_strategy(&self, dim_b: usize, dim_c: usize) -> FiniteStrategy {
        let dim = self.group.order() * dim_b * dim_c;
        let state = CMat::identity(dim, dim) / Complex64::from(dim as f64);
        let uniform = |outcomes: usize, d: usize| {
            vec![CMat::identity(d, d) / Complex64::from(outcomes as f64); outcomes]
        };
        FiniteStrategy {
            dim_b,
            dim_c,
            state,
            bob: self
                .bases
                .iter()
                .map(|b| uniform(b.representatives().len(), dim_b))
                .collect(),
            charlie: self
                .bases
                .iter()
                .map(|b| uniform(b.labels().len(), dim_c))
                .collect(),
        }
    }
}

/// Shared state on `C^G ⊗ B ⊗ C` (in that tensor order) and the two players'
/// POVMs, one family per subgroup.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteStrategy {
    pub dim_b: usize,
    pub dim_c: usize,
    pub state: CMat,
    /// `bob[s][r]` answers coset representative `r` for subgroup `s`.
    pub bob: Vec<Vec<CMat>>,
    /// `charlie[s][l]` answers matrix element `l` for subgroup `s`.
    pub charlie: Vec<Vec<CMat>>,
}

fn hermitian_deviation(m: &CMat) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn min_eigenvalue(m: &CMat) -> f64 {
    let h = (m + m.adjoint()) * Complex64::from(0.5);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

fn check_povm(ops: &[CMat], outcomes: usize, d: usize, who: &str) -> Result<()> {
    ensure!(
        ops.len() == outcomes,
        Validation,
        "{who} POVM has {} outcomes, expected {outcomes}",
        ops.len()
    );
    let mut total = CMat::zeros(d, d);
    for (i, e) in ops.iter().enumerate() {
        ensure!(
            e.nrows() == d && e.ncols() == d,
            Validation,
            "{who} POVM element {i} is not {d}x{d}"
        );
        ensure!(
            hermitian_deviation(e) < TOL && min_eigenvalue(e) > -TOL,
            Validation,
            "{who} POVM element {i} is not positive semidefinite"
        );
        total += e;
    }
    let dev = (total - CMat::identity(d, d))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    ensure!(
        dev < TOL,
        Validation,
        "{who} POVM does not sum to the identity ({dev:e})"
    );
    Ok(())
}

impl FiniteStrategy {
    pub fn validate(&self, game: &CosetGame) -> Result<()> {
        let dim = game.group.order() * self.dim_b * self.dim_c;
        ensure!(
            self.state.nrows() == dim && self.state.ncols() == dim,
            Validation,
            "state must be {dim}x{dim}"
        );
        ensure!(
            hermitian_deviation(&self.state) < TOL,
            Validation,
            "state is not Hermitian"
        );
        ensure!(
            (self.state.trace() - 1.0).norm() < TOL,
            Validation,
            "state trace is {}",
            self.state.trace()
        );
        ensure!(
            min_eigenvalue(&self.state) > -TOL,
            Validation,
            "state is not PSD"
        );
        let s = game.subgroups.len();
        ensure!(
            self.bob.len() == s && self.charlie.len() == s,
            Validation,
            "need one POVM per subgroup for each player"
        );
        for (i, basis) in game.bases.iter().enumerate() {
            check_povm(
                &self.bob[i],
                basis.representatives().len(),
                self.dim_b,
                "Bob",
            )?;
            check_povm(
                &self.charlie[i],
                basis.labels().len(),
                self.dim_c,
                "Charlie",
            )?;
        }
        Ok(())
    }
}

/// `E_H Σ_{g,γ_{m,n}} Tr[(|gH^γ_{m,n}⟩⟨gH^γ_{m,n}| ⊗ B^H_g ⊗ C^H_{γ_{m,n}}) ρ]`.
pub fn strategy_value(game: &CosetGame, strat: &FiniteStrategy) -> Result<f64> {
    strat.validate(game)?;
    let mut total = 0.0;
    for (s, basis) in game.bases.iter().enumerate() {
        for r in 0..basis.representatives().len() {
            for l in 0..basis.labels().len() {
                let op = game
                    .projector(s, r, l)
                    .kronecker(&strat.bob[s][r])
                    .kronecker(&strat.charlie[s][l]);
                // Tr(op ρ) = Σ_ij op_ij ρ_ji
                let t: Complex64 = op
                    .row_iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .zip(strat.state.column(i).iter())
                            .map(|(a, b)| a * b)
                            .sum::<Complex64>()
                    })
                    .sum();
                total += t.re;
            }
        }
    }
    Ok(total / game.subgroups.len() as f64)
}

#[derive(Debug, Clone)]
pub struct SeesawOptions {
    pub dim_b: Option<usize>,
    pub dim_c: Option<usize>,
    pub iterations: usize,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        SeesawOptions {
            dim_b: None,
            dim_c: None,
            iterations: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    pub value: f64,
    pub strategy: FiniteStrategy,
    pub converged: bool,
    pub iterations: usize,
    /// Value after every full round, starting with the seed strategy.
    pub trajectory: Vec<f64>,
}

/// Alternating optimisation over a pure shared state and the two POVM families.
///
/// Starts from a seeded random pure state with uniform POVMs. Each round
/// updates Bob, then Charlie, then the state, keeping a candidate only if it
/// does not lower the value, so the trajectory is nondecreasing.
pub fn seesaw_lower_bound(
    game: &CosetGame,
    seed: u64,
    opts: &SeesawOptions,
) -> Result<SeesawResult> {
    let order = game.group.order();
    let db = opts.dim_b.unwrap_or(order);
    let dc = opts.dim_c.unwrap_or(order);
    ensure!(
        db >= 1 && dc >= 1,
        Domain,
        "ancilla dimensions must be positive"
    );
    let dim = order * db * dc;
    ensure!(
        dim <= 4096,
        Resource,
        "state dimension {dim} is too large for dense see-saw"
    );

    let mut rng = seed::rng(seed, STREAM_SEESAW, 0);
    let mut psi = DVector::<Complex64>::from_fn(dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    psi /= Complex64::from(psi.norm());

    let base = game.uniform_strategy(db, dc);
    let mut bob = base.bob;
    let mut charlie = base.charlie;

    let mut value = pure_value(game, &psi, &bob, &charlie, db, dc);
    let mut trajectory = vec![value];
    let mut converged = false;
    let mut rounds = 0;

    for _ in 0..opts.iterations {
        rounds += 1;
        let before = value;

        for s in 0..game.subgroups.len() {
            let targets = bob_targets(game, s, &psi, &charlie[s], db, dc);
            bob[s] = improve_povm(&bob[s], &targets);
        }
        for s in 0..game.subgroups.len() {
            let targets = charlie_targets(game, s, &psi, &bob[s], db, dc);
            charlie[s] = improve_povm(&charlie[s], &targets);
        }
        let w = game_operator(game, &bob, &charlie);
        let eig = SymmetricEigen::new(w);
        let top = eig.eigenvalues.imax();
        let candidate = eig.eigenvectors.column(top).into_owned();
        let cand_value = pure_value(game, &candidate, &bob, &charlie, db, dc);
        if cand_value >= pure_value(game, &psi, &bob, &charlie, db, dc) {
            psi = candidate;
        }
        value = pure_value(game, &psi, &bob, &charlie, db, dc);
        trajectory.push(value);
        if (value - before).abs() < 1e-12 {
            converged = true;
            break;
        }
    }

    let strategy = FiniteStrategy {
        dim_b: db,
        dim_c: dc,
        state: &psi * psi.adjoint(),
        bob,
        charlie,
    };
    let value = strategy_value(game, &strategy)?;
    Ok(SeesawResult {
        value,
        strategy,
        converged,
        iterations: rounds,
        trajectory,
    })
}

/// `Φ[b][c] = Σ_a conj(v_a) ψ[a][b][c]` for basis state `v`.
fn contract(
    v: nalgebra::DVectorView<'_, Complex64>,
    psi: &DVector<Complex64>,
    db: usize,
    dc: usize,
) -> CMat {
    let mut phi = CMat::zeros(db, dc);
    for (a, va) in v.iter().enumerate() {
        if va.norm() == 0.0 {
            continue;
        }
        let w = va.conj();
        for b in 0..db {
            for c in 0..dc {
                phi[(b, c)] += w * psi[(a * db + b) * dc + c];
            }
        }
    }
    phi
}

fn pure_value(
    game: &CosetGame,
    psi: &DVector<Complex64>,
    bob: &[Vec<CMat>],
    charlie: &[Vec<CMat>],
    db: usize,
    dc: usize,
) -> f64 {
    let mut total = 0.0;
    for (s, basis) in game.bases.iter().enumerate() {
        for r in 0..basis.representatives().len() {
            for l in 0..basis.labels().len() {
                let phi = contract(basis.column(r, l), psi, db, dc);
                // ⟨φ|B⊗C|φ⟩ = Tr(Φ† B Φ Cᵀ)
                total += (phi.adjoint() * &bob[s][r] * &phi * charlie[s][l].transpose())
                    .trace()
                    .re;
            }
        }
    }
    total / game.subgroups.len() as f64
}

/// `Y_r = Σ_l Φ_{rl} C_lᵀ Φ_{rl}†`, so that the value is `Σ_r Tr(B_r Y_r)`.
fn bob_targets(
    game: &CosetGame,
    s: usize,
    psi: &DVector<Complex64>,
    charlie: &[CMat],
    db: usize,
    dc: usize,
) -> Vec<CMat> {
    let basis = &game.bases[s];
    (0..basis.representatives().len())
        .map(|r| {
            let mut y = CMat::zeros(db, db);
            for (l, c) in charlie.iter().enumerate() {
                let phi = contract(basis.column(r, l), psi, db, dc);
                y += &phi * c.transpose() * phi.adjoint();
            }
            y
        })
        .collect()
}

/// `Z_l = Σ_r Φ_{rl}ᵀ B_rᵀ conj(Φ_{rl})`, so that the value is `Σ_l Tr(C_l Z_l)`.
fn charlie_targets(
    game: &CosetGame,
    s: usize,
    psi: &DVector<Complex64>,
    bob: &[CMat],
    db: usize,
    dc: usize,
) -> Vec<CMat> {
    let basis = &game.bases[s];
    (0..basis.labels().len())
        .map(|l| {
            let mut z = CMat::zeros(dc, dc);
            for (r, b) in bob.iter().enumerate() {
                let phi = contract(basis.column(r, l), psi, db, dc);
                z += phi.transpose() * b.transpose() * phi.conjugate();
            }
            z
        })
        .collect()
}

fn povm_score(povm: &[CMat], targets: &[CMat]) -> f64 {
    povm.iter()
        .zip(targets)
        .map(|(e, y)| (e * y).trace().re)
        .sum()
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
fn spectral(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let h = (m + m.adjoint()) * Complex64::from(0.5);
    let eig = SymmetricEigen::new(h);
    let vals = eig.eigenvalues.map(|x| Complex64::from(f(x)));
    &eig.eigenvectors * CMat::from_diagonal(&vals) * eig.eigenvectors.adjoint()
}

/// Eigenvalues below this are treated as zero when inverting.
fn cutoff(m: &CMat) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    1e-9 * scale.max(1e-300)
}

fn symmetrise(m: CMat) -> CMat {
    (&m + m.adjoint()) * Complex64::from(0.5)
}

/// Pretty-good measurement `S^{-1/2} Y_r S^{-1/2}`, completed on the kernel of `S`.
fn pretty_good(targets: &[CMat]) -> Vec<CMat> {
    let d = targets[0].nrows();
    let total: CMat = targets.iter().fold(CMat::zeros(d, d), |acc, y| acc + y);
    let cut = cutoff(&total);
    let inv_sqrt = spectral(&total, |x| if x > cut { x.powf(-0.5) } else { 0.0 });
    let support = spectral(&total, |x| if x > cut { 1.0 } else { 0.0 });
    let mut out: Vec<CMat> = targets
        .iter()
        .map(|y| symmetrise(&inv_sqrt * y * &inv_sqrt))
        .collect();
    out[0] += CMat::identity(d, d) - support;
    out
}

/// Projective measurement assigning each computational basis vector to the
/// outcome with the largest diagonal entry.
fn basis_argmax(targets: &[CMat]) -> Vec<CMat> {
    let d = targets[0].nrows();
    let mut out = vec![CMat::zeros(d, d); targets.len()];
    for k in 0..d {
        let best = (0..targets.len())
            .max_by(|&a, &b| {
                targets[a][(k, k)]
                    .re
                    .total_cmp(&targets[b][(k, k)].re)
                    .then(b.cmp(&a))
            })
            .unwrap();
        out[best][(k, k)] = Complex64::from(1.0);
    }
    out
}

/// Fixed-point iteration `E_r <- R^{-1/2} E_r Y_r E_r R^{-1/2}` with
/// `R = Σ_r E_r Y_r E_r`.
fn iterate_povm(start: &[CMat], targets: &[CMat], steps: usize) -> Vec<CMat> {
    let d = targets[0].nrows();
    let mut cur = start.to_vec();
    for _ in 0..steps {
        let parts: Vec<CMat> = cur
            .iter()
            .zip(targets)
            .map(|(e, y)| symmetrise(e * y * e))
            .collect();
        let total = parts.iter().fold(CMat::zeros(d, d), |acc, p| acc + p);
        let cut = cutoff(&total);
        let inv_sqrt = spectral(&total, |x| if x > cut { x.powf(-0.5) } else { 0.0 });
        let support = spectral(&total, |x| if x > cut { 1.0 } else { 0.0 });
        let mut next: Vec<CMat> = parts
            .iter()
            .map(|p| symmetrise(&inv_sqrt * p * &inv_sqrt))
            .collect();
        next[0] += CMat::identity(d, d) - support;
        cur = next;
    }
    cur
}

/// Projects every element onto the PSD cone and renormalises so the family
/// sums to the identity exactly, removing drift from the pseudo-inverses.
fn repair(povm: Vec<CMat>) -> Vec<CMat> {
    let d = povm[0].nrows();
    let psd: Vec<CMat> = povm.iter().map(|e| spectral(e, |x| x.max(0.0))).collect();
    let total = psd.iter().fold(CMat::zeros(d, d), |acc, e| acc + e);
    let inv_sqrt = spectral(&total, |x| x.powf(-0.5));
    psd.iter()
        .map(|e| symmetrise(&inv_sqrt * e * &inv_sqrt))
        .collect()
}

fn improve_povm(current: &[CMat], targets: &[CMat]) -> Vec<CMat> {
    let mut best = current.to_vec();
    let mut best_score = povm_score(current, targets);
    let pgm = repair(pretty_good(targets));
    let argmax = basis_argmax(targets);
    let candidates = [
        repair(iterate_povm(&pgm, targets, 20)),
        repair(iterate_povm(&argmax, targets, 5)),
        pgm,
        argmax,
    ];
    for cand in candidates {
        let score = povm_score(&cand, targets);
        if score > best_score + 1e-13 {
            best_score = score;
            best = cand;
        }
    }
    best
}

/// `W = E_H Σ_{r,l} P_{rl} ⊗ B_r ⊗ C_l`.
fn game_operator(game: &CosetGame, bob: &[Vec<CMat>], charlie: &[Vec<CMat>]) -> CMat {
    let order = game.group.order();
    let (db, dc) = (bob[0][0].nrows(), charlie[0][0].nrows());
    let dim = order * db * dc;
    let mut w = CMat::zeros(dim, dim);
    for (s, basis) in game.bases.iter().enumerate() {
        for r in 0..basis.representatives().len() {
            for l in 0..basis.labels().len() {
                w += game
                    .projector(s, r, l)
                    .kronecker(&bob[s][r])
                    .kronecker(&charlie[s][l]);
            }
        }
    }
    let w = w / Complex64::from(game.subgroups.len() as f64);
    symmetrise(w)
}
