//! Constructions over pullback squares of algebras: patching projective
//! complexes across a square, partitioning projectives by their corner
//! images, endomorphism squares, tilting transfer, and presentation
//! surgeries (vertex gluing, arrow unification, socle identification).

mod patch;

pub use patch::{
    endo_pullback_square, identity_glue, induce_along, induce_chain_map, partition_projectives,
    patch_complex, patch_module, recognize_projective, EndoSquare, Induced, PatchGlue, Patched,
    PatchedModule, ProjectivePartition, RecognizedProjective, SlotData,
};
