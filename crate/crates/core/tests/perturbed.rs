//! End-to-end runs on non-flat backgrounds.

use coupled_wave_core::backgrounds::builtin_background;
use coupled_wave_core::exponents::{ExponentPair, ExponentProfile};
use coupled_wave_core::iteration::{compare_to_direct, picard_run, PicardProblem, Retain, StopReason, Verdict};
use coupled_wave_core::solver::{evolve_coupled, CoupledProblem, Grid, InitialData, Nonlinearity, RadialFunction, RunStatus};

fn problem(bg1: &str, p1: &[f64], bg2: &str, p2: &[f64], eps: f64) -> CoupledProblem {
    let data = InitialData::new(RadialFunction::Gaussian { amp: eps, center: 0.0, width: 1.0 }, RadialFunction::Zero);
    CoupledProblem {
        spec1: builtin_background(bg1, p1).unwrap(),
        spec2: builtin_background(bg2, p2).unwrap(),
        fp: Nonlinearity::absolute(2.5),
        fq: Nonlinearity::absolute(3.0),
        data_u: data,
        data_v: data,
    }
}

#[test]
fn picard_contracts_on_perturbed_backgrounds() {
    let system = problem("long-range-power", &[0.1, 1.5], "composite", &[0.05, 1.2, 0.05, 2.0, 0.02, 0.02], 1e-2);
    let grid = Grid::new(22.0, 330, 0.4, 8.0).unwrap();
    let support = system.data_u.support_radius();
    for spec in [&system.spec1, &system.spec2] {
        grid.validate(spec, support).unwrap();
    }
    let pr = PicardProblem {
        psi: PicardProblem::default_cutoff(&system).unwrap(),
        system,
        profile: ExponentProfile::new(ExponentPair::new(2.5, 3.0).unwrap()).unwrap(),
        grid,
        window: (0.0, 8.0),
    };
    let run = picard_run(&pr, 4, Retain::Last).unwrap();
    assert_eq!(run.stop, StopReason::Finished);
    assert_eq!(run.contraction().verdict, Verdict::Contracting);
    assert!(run.boundedness_ratio().unwrap() <= 4.0);
    let (u, v, outcome) = evolve_coupled(&pr.system, &pr.grid).unwrap();
    assert_eq!(outcome.status, RunStatus::Completed);
    let gap = compare_to_direct(run.last_fields().unwrap(), &(u, v), pr.window).unwrap();
    assert!(gap < 1e-14, "{gap}");
}

#[test]
fn lower_order_terms_keep_small_data_small() {
    let system = problem("lower-order", &[0.1, 0.1], "short-range-bump", &[0.1, 2.0], 1e-3);
    let grid = Grid::new(34.0, 340, 0.4, 20.0).unwrap().with_stride(20);
    let (u, v, outcome) = evolve_coupled(&system, &grid).unwrap();
    assert_eq!(outcome.status, RunStatus::Completed);
    assert!(u.sup_after(10.0) < 1e-3 && v.sup_after(10.0) < 1e-3);
}
