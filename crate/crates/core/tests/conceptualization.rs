use std::collections::BTreeMap;

use infofit_core::conceptualization::*;
use infofit_core::exec::Sequential;
use infofit_core::rng;
use infofit_core::worlds::{sample_world, World};
use rand::Rng;

fn ls(coords: Vec<f64>, label: usize) -> LatentSample {
    LatentSample { coords, label }
}

#[test]
fn ensemble_accuracy_falls_as_intermix_grows() {
    let w = World::two_gaussians(10, 0.5, 1).unwrap();
    let report = autoencoder_ensemble(&w, &EnsembleConfig::default(), 7, &Sequential).unwrap();
    assert_eq!(report.members.len(), 20);
    assert!(report.correlation <= -0.5, "correlation {}", report.correlation);
}

#[test]
fn intermix_is_rotation_invariant() {
    let w = World::two_gaussians(2, 1.0, 3).unwrap();
    let samples = sample_world(&w, 10_000, 4);
    let plain: Vec<LatentSample> = samples.iter().map(|s| ls(s.obs.clone(), s.label)).collect();
    let (c, s) = (0.6f64, 0.8f64);
    let turned: Vec<LatentSample> = samples
        .iter()
        .map(|x| ls(vec![c * x.obs[0] - s * x.obs[1], s * x.obs[0] + c * x.obs[1]], x.label))
        .collect();
    let spec = GridSpec::new(16);
    let a = intermix_region(&plain, &spec, DEFAULT_BETA_RATIO).unwrap().mu_x;
    let b = intermix_region(&turned, &spec, DEFAULT_BETA_RATIO).unwrap().mu_x;
    assert!((a - b).abs() <= 0.1, "{a} vs {b}");
}

#[test]
fn identical_classes_separate_at_chance() {
    let mut s = rng::stream(5);
    let latents: Vec<LatentSample> = (0..20_000)
        .map(|i| ls(vec![s.random_range(0.0..1.0), s.random_range(0.0..1.0)], i % 2))
        .collect();
    let score = separation_score(&latents, 2, &GridSpec::new(4)).unwrap();
    assert!((score - 0.5).abs() < 0.02, "{score}");
}

/// Tabular generative models on a fixed 4x4 grid: every lookup table over
/// the occupied cells is tried, and the best error must respect the floor.
#[test]
fn tabular_lookups_respect_the_error_floor() {
    let spec = GridSpec::with_bounds(4, vec![0.0, 0.0], vec![1.0, 1.0]);
    let centre = |cx: usize, cy: usize| vec![(cx as f64 + 0.5) / 4.0, (cy as f64 + 0.5) / 4.0];
    let mut cases: Vec<Vec<LatentSample>> = Vec::new();
    for mixed in 0..=4usize {
        // `mixed` of the four occupied cells hold both classes 50/50
        let mut l = Vec::new();
        for c in 0..4 {
            let p = centre(c, c);
            if c < mixed {
                l.extend([ls(p.clone(), 0), ls(p.clone(), 1), ls(p.clone(), 0), ls(p, 1)]);
            } else {
                l.extend([ls(p.clone(), c % 2), ls(p.clone(), c % 2), ls(p.clone(), c % 2), ls(p, c % 2)]);
            }
        }
        cases.push(l);
    }
    for l in &cases {
        let mu = intermix_region(l, &spec, DEFAULT_BETA_RATIO).unwrap().mu_x;
        let cells: Vec<Vec<usize>> = (0..4).map(|c| vec![c, c]).collect();
        let mut best = f64::INFINITY;
        for assignment in 0..16u32 {
            let table: BTreeMap<Vec<usize>, usize> =
                cells.iter().enumerate().map(|(i, c)| (c.clone(), ((assignment >> i) & 1) as usize)).collect();
            best = best.min(CellLookup::from_table(spec.clone(), table).generative_error(l).unwrap());
        }
        assert!(best >= 0.5 * mu - 0.02, "error {best} below floor for mu {mu}");
        assert_eq!(best, CellLookup::majority(l, &spec).unwrap().generative_error(l).unwrap());
    }
}

#[test]
fn single_class_ensemble_is_degenerate() {
    use infofit_core::worlds::{BoolFunction, WorldKind};
    let w = World::new(WorldKind::Logic { function: BoolFunction::False, jitter: 0.1, exhaustive_corners: false }, 1)
        .unwrap();
    let cfg = EnsembleConfig { members: 2, eval_samples: 50, ..EnsembleConfig::default() };
    assert!(matches!(autoencoder_ensemble(&w, &cfg, 1, &Sequential), Err(infofit_core::Error::DegenerateInput(_))));
}
