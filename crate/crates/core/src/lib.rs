//! Exact computations on torsion-free abelian groups given as staged
//! presentations inside rational vector spaces.

pub mod constructions;
pub mod decomposition;
pub mod error;
pub mod lattice;
pub mod presentation;
pub mod primes;
pub mod typesystem;

pub use constructions::{
    cof_group, congruence_system_check, extract_path, free_group, fuchs_group, infinite_base_group,
    cofinite_summands, path_summands, tree_group, CeSetSpec, PathSpec, TreeSpec, TruncationParams,
};
pub use decomposition::{
    divisibility_split_check, find_links, indecomposable_by_links, is_basis, projection_property,
    search_decomposition, search_tree_decomposition, verify_direct_sum, verify_direct_sum_excluding,
    DecompositionCertificate, IndecompCertificate, LinkGraph, SummandPair,
};
pub use error::{Error, Result};
pub use lattice::{hnf, solve_in_lattice, HermiteForm, IntMatrix, Rational};
pub use presentation::{BasisIndex, Construction, Element, StageHeight, StagedPresentation, Word};
pub use primes::{nth_prime, prime_for, PrimeAssignment};
pub use typesystem::{char_equiv, strictly_maximal, structural_characteristic, type_leq, Characteristic, Height, TypeClass};
