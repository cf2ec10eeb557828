//! Finite groups, their coset-state bases, and the finite coset monogamy game.
//!
//! Groups are explicit multiplication tables. Irreps are supported for abelian
//! subgroups and for dihedral subgroups `D_p` with `p` odd.

mod basis;
mod group;
mod irreps;
mod strategy;

pub use basis::{finite_bound, overlap_check, CosetBasis, FiniteBound, OverlapReport};
pub use group::{
    all_subgroups, construct_group, construct_group_capped, register_subspace, GroupSpec,
    GroupTable, Subgroup, DEFAULT_GROUP_CAP,
};
pub use irreps::{irreps, Irrep, IrrepSet, MatrixElement};
pub use strategy::{
    seesaw_lower_bound, strategy_value, CosetGame, FiniteStrategy, SeesawOptions, SeesawResult,
};
