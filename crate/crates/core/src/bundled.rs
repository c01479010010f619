//! The scenario files shipped in `scenarios/`.

pub const TRIANGLE: &str = include_str!("../../../scenarios/triangle.scn");
pub const EXAMPLE1: &str = include_str!("../../../scenarios/example1.scn");
pub const QUBIT_TETRA: &str = include_str!("../../../scenarios/qubit-tetra.scn");
pub const SPIN_OCTA: &str = include_str!("../../../scenarios/spin-octa.scn");
pub const CRD: &str = include_str!("../../../scenarios/crd.scn");
pub const BLOCKS: &str = include_str!("../../../scenarios/blocks.scn");

/// `(file name, contents)` for every bundled scenario.
pub const ALL: [(&str, &str); 6] = [
    ("triangle.scn", TRIANGLE),
    ("example1.scn", EXAMPLE1),
    ("qubit-tetra.scn", QUBIT_TETRA),
    ("spin-octa.scn", SPIN_OCTA),
    ("crd.scn", CRD),
    ("blocks.scn", BLOCKS),
];

/// Bundled scenarios that declare parameter maps.
pub const WITH_PARAMETERS: [(&str, &str); 3] =
    [("triangle.scn", TRIANGLE), ("qubit-tetra.scn", QUBIT_TETRA), ("spin-octa.scn", SPIN_OCTA)];
