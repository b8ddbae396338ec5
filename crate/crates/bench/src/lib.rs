//! Shared fixtures for the criterion benchmarks.

use plate_dcm::benchmarks::{BenchmarkCase, CaseId};
use plate_dcm::network::{Architecture, InitScheme, Parameters};
use plate_dcm::{CollocationLoss, LossWeights};

/// The default collocation loss of a benchmark case with seeded parameters.
pub fn fixture(id: CaseId, layers: usize, neurons: usize) -> (CollocationLoss, Parameters) {
    let case = BenchmarkCase::new(id);
    let points = case.default_points(0).expect("default sampling");
    let loss = CollocationLoss::new(&case.problem, &points, LossWeights::plain()).expect("valid case");
    let arch = Architecture::new(layers, neurons).expect("valid architecture");
    (loss, Parameters::initialize(&arch, InitScheme::default(), 1))
}
