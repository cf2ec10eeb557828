use nalgebra::DMatrix;
use num_complex::Complex64;

use super::group::{GroupTable, Subgroup};
use super::irreps::{irreps, IrrepSet, MatrixElement};
use crate::bounds::orthogonal_permutations;
use crate::error::{ensure, Result};

/// The coset-state basis `|gH^γ_{m,n}⟩` of `C^G` for one subgroup.
///
/// Column `r * labels.len() + l` holds the state for representative `r` and
/// matrix element `l`.
#[derive(Debug, Clone)]
pub struct CosetBasis {
    representatives: Vec<usize>,
    labels: Vec<MatrixElement>,
    dims: Vec<usize>,
    states: DMatrix<Complex64>,
}

impl CosetBasis {
    pub fn new(g: &GroupTable, h: &Subgroup) -> Result<Self> {
        let set = irreps(g, h)?;
        Ok(Self::with_irreps(g, h, &set))
    }

    pub fn with_irreps(g: &GroupTable, h: &Subgroup, set: &IrrepSet) -> Self {
        let representatives = h.coset_representatives(g);
        let labels = set.matrix_elements();
        let dims = set.irreps().iter().map(|r| r.dim()).collect::<Vec<_>>();
        let mut states = DMatrix::zeros(g.order(), representatives.len() * labels.len());
        for (r, &rep) in representatives.iter().enumerate() {
            for (l, lab) in labels.iter().enumerate() {
                let irrep = &set.irreps()[lab.irrep];
                let scale = (irrep.dim() as f64 / h.order() as f64).sqrt();
                let col = r * labels.len() + l;
                for (pos, &x) in h.elements().iter().enumerate() {
                    states[(g.mul(rep, x), col)] = irrep.entry(pos, lab.m, lab.n) * scale;
                }
            }
        }
        CosetBasis {
            representatives,
            labels,
            dims,
            states,
        }
    }

    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }

    pub fn labels(&self) -> &[MatrixElement] {
        &self.labels
    }

    pub fn dim_of(&self, label: &MatrixElement) -> usize {
        self.dims[label.irrep]
    }

    pub fn states(&self) -> &DMatrix<Complex64> {
        &self.states
    }

    pub fn column(
        &self,
        rep_index: usize,
        label_index: usize,
    ) -> nalgebra::DVectorView<'_, Complex64> {
        self.states
            .column(rep_index * self.labels.len() + label_index)
    }

    /// Largest entry of `|Gram - I|`.
    pub fn gram_deviation(&self) -> f64 {
        let gram = self.states.adjoint() * &self.states;
        let eye = DMatrix::<Complex64>::identity(gram.nrows(), gram.ncols());
        (gram - eye).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `|Σ |v⟩⟨v| - I|` over all basis states.
    pub fn completeness_deviation(&self) -> f64 {
        let sum = &self.states * self.states.adjoint();
        let eye = DMatrix::<Complex64>::identity(sum.nrows(), sum.ncols());
        (sum - eye).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Operator norm of `(Σ_g |gH^γ_{m,n}⟩⟨gH^γ_{m,n}|) Π_{qK}` next to its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapReport {
    pub norm: f64,
    pub bound: f64,
}

impl OverlapReport {
    pub fn holds(&self) -> bool {
        self.norm <= self.bound + 1e-9
    }
}

/// `norm` is the largest singular value of the rows `qK` of the matrix whose
/// columns are the `|gH^γ_{m,n}⟩`; those columns are orthonormal, so this is
/// the norm of the projector product.
pub fn overlap_check(
    g: &GroupTable,
    h: &Subgroup,
    basis_h: &CosetBasis,
    k: &Subgroup,
    label_index: usize,
    q: usize,
) -> Result<OverlapReport> {
    ensure!(
        basis_h.states.nrows() == g.order(),
        Validation,
        "basis dimension {} does not match |G| = {}",
        basis_h.states.nrows(),
        g.order()
    );
    ensure!(
        label_index < basis_h.labels.len(),
        Domain,
        "no matrix element {label_index}"
    );
    ensure!(
        q < g.order(),
        Domain,
        "coset representative {q} out of range"
    );
    let rows: Vec<usize> = k.elements().iter().map(|&x| g.mul(q, x)).collect();
    let cols = basis_h.representatives.len();
    let block = DMatrix::from_fn(rows.len(), cols, |i, r| {
        basis_h.column(r, label_index)[rows[i]]
    });
    let norm = block.singular_values().iter().cloned().fold(0.0, f64::max);
    let d = basis_h.dim_of(&basis_h.labels[label_index]) as f64;
    let bound = (d * h.intersection_order(k) as f64 / h.order() as f64).sqrt();
    Ok(OverlapReport { norm, bound })
}

/// The finite-group game bound under the cyclic permutation family.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteBound {
    /// Average of `min(1, max_{H,γ} sqrt(d_γ |H ∩ π_i(H)| / |H|))`.
    pub value: f64,
    /// The same average without the per-term cap at 1.
    pub raw: f64,
    pub terms: Vec<f64>,
}

/// Each per-permutation term bounds the norm of a product of two projectors,
/// which never exceeds 1; the cap matters for `i = 0`, where `H ∩ π_0(H) = H`
/// and the raw expression is `sqrt(max d_γ)`.
pub fn finite_bound(g: &GroupTable, subgroups: &[Subgroup]) -> Result<FiniteBound> {
    ensure!(!subgroups.is_empty(), Domain, "need at least one subgroup");
    let max_dims = subgroups
        .iter()
        .map(|h| irreps(g, h).map(|s| s.max_dim()))
        .collect::<Result<Vec<_>>>()?;
    let perms = orthogonal_permutations(subgroups.len())?;
    let mut terms = Vec::with_capacity(perms.len());
    for pi in &perms {
        let mut best = 0.0f64;
        for (j, h) in subgroups.iter().enumerate() {
            let k = &subgroups[pi.apply(j)];
            let v = (max_dims[j] as f64 * h.intersection_order(k) as f64 / h.order() as f64).sqrt();
            best = best.max(v);
        }
        terms.push(best);
    }
    let m = terms.len() as f64;
    Ok(FiniteBound {
        value: terms.iter().map(|t| t.min(1.0)).sum::<f64>() / m,
        raw: terms.iter().sum::<f64>() / m,
        terms,
    })
}
