use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::group::{GroupTable, Subgroup};
use crate::error::{ensure, Error, Result};

const TOL: f64 = 1e-10;

/// One irreducible unitary representation, with a matrix for every element of
/// the subgroup in the order of `Subgroup::elements`.
#[derive(Debug, Clone, PartialEq)]
pub struct Irrep {
    dim: usize,
    matrices: Vec<DMatrix<Complex64>>,
}

impl Irrep {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Matrix of the element at `pos` within the subgroup's element list.
    pub fn matrix(&self, pos: usize) -> &DMatrix<Complex64> {
        &self.matrices[pos]
    }

    pub fn entry(&self, pos: usize, m: usize, n: usize) -> Complex64 {
        self.matrices[pos][(m, n)]
    }
}

/// A full set of inequivalent irreps of a subgroup.
///
/// Ordered trivial first, then the other real (`±1`-valued) characters, then
/// the remaining characters, then higher-dimensional irreps.
#[derive(Debug, Clone, PartialEq)]
pub struct IrrepSet {
    irreps: Vec<Irrep>,
}

/// A matrix-element label `γ_{m,n}`: irrep index and 0-based row and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatrixElement {
    pub irrep: usize,
    pub m: usize,
    pub n: usize,
}

impl IrrepSet {
    pub fn irreps(&self) -> &[Irrep] {
        &self.irreps
    }

    pub fn len(&self) -> usize {
        self.irreps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.irreps.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.irreps.iter().map(Irrep::dim).max().unwrap_or(0)
    }

    /// All matrix elements, irrep by irrep, row-major within an irrep.
    pub fn matrix_elements(&self) -> Vec<MatrixElement> {
        let mut out = Vec::new();
        for (irrep, rep) in self.irreps.iter().enumerate() {
            for m in 0..rep.dim {
                for n in 0..rep.dim {
                    out.push(MatrixElement { irrep, m, n });
                }
            }
        }
        out
    }

    /// Checks the homomorphism property, unitarity, Schur orthogonality and
    /// `Σ d² = |H|`, all to 1e-10.
    pub fn check(&self, g: &GroupTable, h: &Subgroup) -> Result<()> {
        let order = h.order();
        let dims: usize = self.irreps.iter().map(|r| r.dim * r.dim).sum();
        ensure!(
            dims == order,
            Validation,
            "sum of squared dimensions is {dims}, expected {order}"
        );
        let els = h.elements();
        for (idx, rep) in self.irreps.iter().enumerate() {
            ensure!(
                rep.matrices.len() == order,
                Validation,
                "irrep {idx} has {} matrices for {order} elements",
                rep.matrices.len()
            );
            let eye = DMatrix::<Complex64>::identity(rep.dim, rep.dim);
            for (i, &a) in els.iter().enumerate() {
                let u = &rep.matrices[i];
                ensure!(
                    (u.adjoint() * u - &eye).norm() < TOL,
                    Validation,
                    "irrep {idx} is not unitary at {}",
                    g.label(a)
                );
                for (j, &b) in els.iter().enumerate() {
                    let k = h
                        .position(g.mul(a, b))
                        .ok_or_else(|| Error::Validation("subgroup not closed".to_string()))?;
                    ensure!(
                        (u * &rep.matrices[j] - &rep.matrices[k]).norm() < TOL,
                        Validation,
                        "irrep {idx} is not a homomorphism at ({}, {})",
                        g.label(a),
                        g.label(b)
                    );
                }
            }
        }
        let labels = self.matrix_elements();
        for x in &labels {
            for y in &labels {
                let s: Complex64 = (0..order)
                    .map(|p| {
                        self.irreps[x.irrep].entry(p, x.m, x.n).conj()
                            * self.irreps[y.irrep].entry(p, y.m, y.n)
                    })
                    .sum();
                let expect = if x == y {
                    order as f64 / self.irreps[x.irrep].dim as f64
                } else {
                    0.0
                };
                ensure!(
                    (s - expect).norm() < TOL,
                    Validation,
                    "Schur orthogonality fails between {x:?} and {y:?}"
                );
            }
        }
        Ok(())
    }
}

fn root_of_unity(num: usize, den: usize) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (num % den) as f64 / den as f64)
}

/// Irreps of an abelian subgroup or of a dihedral subgroup `D_p` with `p` odd.
pub fn irreps(g: &GroupTable, h: &Subgroup) -> Result<IrrepSet> {
    if h.is_abelian(g) {
        Ok(abelian_characters(g, h))
    } else {
        dihedral_irreps(g, h)
    }
}

/// Characters built by extending from the trivial subgroup one element at a
/// time. Values are stored as integer phases in units of `1/|H|` turns so no
/// rounding accumulates.
fn abelian_characters(g: &GroupTable, h: &Subgroup) -> IrrepSet {
    let order = h.order();
    let pos = |x: usize| h.position(x).expect("element of subgroup");
    let mut in_k = vec![false; order];
    in_k[0] = true;
    let mut members = vec![0usize];
    let mut phases: Vec<Vec<u32>> = vec![vec![0; order]];

    while members.len() < order {
        let x = *h
            .elements()
            .iter()
            .find(|&&e| !in_k[pos(e)])
            .expect("subgroup larger than its members");
        let mut m = 1;
        let mut xm = x;
        while !in_k[pos(xm)] {
            xm = g.mul(xm, x);
            m += 1;
        }
        let step = order / m;
        let mut new_members = members.clone();
        for j in 1..m {
            let xj = g.pow(x, j);
            for &k in &members {
                let y = g.mul(k, xj);
                in_k[pos(y)] = true;
                new_members.push(y);
            }
        }
        let mut new_phases = Vec::with_capacity(phases.len() * m);
        for chi in &phases {
            let t0 = chi[pos(xm)] as usize;
            debug_assert_eq!(t0 % m, 0);
            for l in 0..m {
                let tc = t0 / m + l * step;
                let mut next = chi.clone();
                for j in 1..m {
                    let xj = g.pow(x, j);
                    for &k in &members {
                        next[pos(g.mul(k, xj))] = ((chi[pos(k)] as usize + j * tc) % order) as u32;
                    }
                }
                new_phases.push(next);
            }
        }
        members = new_members;
        phases = new_phases;
    }

    let class = |chi: &Vec<u32>| -> u8 {
        if chi.iter().all(|&t| t == 0) {
            0
        } else if chi.iter().all(|&t| 2 * t as usize % order == 0) {
            1
        } else {
            2
        }
    };
    let mut ordered: Vec<(u8, usize)> = phases
        .iter()
        .enumerate()
        .map(|(i, c)| (class(c), i))
        .collect();
    ordered.sort();

    let irreps = ordered
        .into_iter()
        .map(|(_, i)| Irrep {
            dim: 1,
            matrices: phases[i]
                .iter()
                .map(|&t| DMatrix::from_element(1, 1, root_of_unity(t as usize, order)))
                .collect(),
        })
        .collect();
    IrrepSet { irreps }
}

/// `D_p`, `p` odd, presented as `⟨ρ, τ⟩` with `ρ` the smallest-index element of
/// order `p` and `τ` the smallest-index involution outside `⟨ρ⟩`. The
/// two-dimensional irreps are `γ_k(ρ^j τ^e) = diag(ω^{jk}, ω^{-jk}) X^e`.
fn dihedral_irreps(g: &GroupTable, h: &Subgroup) -> Result<IrrepSet> {
    let order = h.order();
    let unsupported = || {
        Error::Unsupported(format!(
            "irreps of non-abelian subgroup of order {order} that is not D_p with p odd"
        ))
    };
    if order % 2 != 0 || (order / 2) % 2 == 0 || order < 6 {
        return Err(unsupported());
    }
    let p = order / 2;
    let rho = *h
        .elements()
        .iter()
        .find(|&&x| g.element_order(x) == p)
        .ok_or_else(unsupported)?;
    let rotations = Subgroup::generate(g, &[rho])?;
    let tau = *h
        .elements()
        .iter()
        .find(|&&x| g.element_order(x) == 2 && !rotations.contains(x))
        .ok_or_else(unsupported)?;
    if g.mul(g.mul(tau, rho), tau) != g.inv(rho) {
        return Err(unsupported());
    }

    // word[pos] = (j, e) with element = ρ^j τ^e
    let mut word = vec![None; order];
    for j in 0..p {
        for e in 0..2 {
            let x = g.mul(g.pow(rho, j), g.pow(tau, e));
            let pos = h.position(x).ok_or_else(unsupported)?;
            word[pos] = Some((j, e));
        }
    }
    let word: Vec<(usize, usize)> = word
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(unsupported)?;

    let one = Complex64::new(1.0, 0.0);
    let scalar = |f: &dyn Fn(usize, usize) -> f64| Irrep {
        dim: 1,
        matrices: word
            .iter()
            .map(|&(j, e)| DMatrix::from_element(1, 1, one * f(j, e)))
            .collect(),
    };
    let mut irreps = vec![
        scalar(&|_, _| 1.0),
        scalar(&|_, e| if e == 0 { 1.0 } else { -1.0 }),
    ];
    for k in 1..=(p - 1) / 2 {
        let matrices = word
            .iter()
            .map(|&(j, e)| {
                let w = root_of_unity(j * k, p);
                let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![w, w.conj()]));
                if e == 0 {
                    d
                } else {
                    let x = DMatrix::from_row_slice(2, 2, &[0.0.into(), one, one, 0.0.into()]);
                    d * x
                }
            })
            .collect();
        irreps.push(Irrep { dim: 2, matrices });
    }
    Ok(IrrepSet { irreps })
}
