use std::fs;
use std::path::Path;

use ipse::env::FeatureEnvironment;
use ipse::env::Environment;
use ipse::features::BCTS_DIRECTIONS;
use ipse::harness::{evaluate_policy, rescale_weights_for_report, run_experiment, ExperimentConfig, DEFAULT_STEP_CAP};
use ipse::policy::LinearPolicy;
use ipse::tetris::Tetris;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_config(out: &Path, variants: &str, replications: u32) -> ExperimentConfig {
    let text = format!(
        "variants = {variants}\nreplications = {replications}\ntotal_iterations = 6\neval_every = 3\neval_games = 2\nmaster_seed = 17\n"
    );
    let mut cfg = ExperimentConfig::parse(&text).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn zero_weights_play_like_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = evaluate_policy(&[0.0; 8], 30, &mut rng, DEFAULT_STEP_CAP);
    assert!(r.mean_score < 5.0, "{r:?}");
    assert_eq!((r.games, r.capped_games), (30, 0));
}

#[test]
fn negated_directions_score_no_better() {
    let negated = BCTS_DIRECTIONS.map(|d| -d);
    let good = evaluate_policy(&BCTS_DIRECTIONS, 30, &mut ChaCha8Rng::seed_from_u64(2), DEFAULT_STEP_CAP);
    let bad = evaluate_policy(&negated, 30, &mut ChaCha8Rng::seed_from_u64(2), DEFAULT_STEP_CAP);
    assert!(bad.mean_score <= good.mean_score, "{bad:?} vs {good:?}");
}

#[test]
fn rescaling_keeps_greedy_choices() {
    let env = Tetris::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let beta = [-1.3, 0.7, -0.2, -2.5, -0.9, -0.4, -0.1, -3.0];
    let (scaled, ok) = rescale_weights_for_report(&beta);
    assert!(ok);
    assert_eq!(scaled[7], -1.0);
    for _ in 0..200 {
        let state = env.initial_state(&mut rng);
        let cands = env.candidates(&state, &env.legal_actions(&state));
        let a = LinearPolicy::new(beta).scores(&cands);
        let b = LinearPolicy::new(scaled).scores(&cands);
        let argmax = |s: &[f64]| {
            let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            // rescaling can split exact ties by one rounding step
            let tol = 1e-12 * (1.0 + m.abs());
            s.iter().enumerate().filter(|(_, &x)| x >= m - tol).map(|(i, _)| i).collect::<Vec<_>>()
        };
        assert_eq!(argmax(&a), argmax(&b));
    }
}

#[test]
fn experiment_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "m_unregularized, ipse", 3);
    let outcome = run_experiment(&cfg).unwrap();
    assert_eq!(outcome.results.len(), 6);
    assert!(outcome.aborted.is_empty());

    let traces: Vec<_> = fs::read_dir(dir.path().join("traces")).unwrap().collect();
    assert_eq!(traces.len(), 6);
    assert!(dir.path().join("traces/ipse_r2.csv").exists());
    assert!(dir.path().join("aggregated_curve.csv").exists());

    let header = |name: &str| read(&dir.path().join(name)).lines().next().unwrap().to_string();
    assert_eq!(header("learning_curve.csv"), "variant,replication,iteration,phase,mean_score,std_score,games,capped_games");
    assert_eq!(
        header("weights.csv"),
        "variant,replication,iteration,phase,lambda,beta_landing_height,beta_eroded_piece_cells,beta_row_transitions,\
beta_column_transitions,beta_holes,beta_board_wells,beta_hole_depth,beta_rows_with_holes,rescaled_flag"
    );
    assert_eq!(header("directions.csv"), "variant,replication,feature,direction,decided_at_iteration,n_plus,n_minus");
    assert_eq!(header("meter.csv"), "variant,replication,iteration,generative_calls");

    // evaluation points 0, 3, 6 for each of 6 replications
    assert_eq!(read(&dir.path().join("learning_curve.csv")).lines().count(), 1 + 6 * 3);
    // iterations 0..=6
    assert_eq!(read(&dir.path().join("weights.csv")).lines().count(), 1 + 6 * 7);
    // 8 features for each ipse replication
    assert_eq!(read(&dir.path().join("directions.csv")).lines().count(), 1 + 3 * 8);

    let mut per_rep = std::collections::HashMap::<(String, String), u64>::new();
    for line in read(&dir.path().join("meter.csv")).lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let calls: u64 = f[3].parse().unwrap();
        assert!(calls <= 3434);
        *per_rep.entry((f[0].into(), f[1].into())).or_default() += calls;
    }
    assert!(per_rep.values().all(|&c| c <= 6 * 3434));
}

#[test]
fn aggregated_curve_is_the_pointwise_mean() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small_config(dir.path(), "lfd_only", 3)).unwrap();
    let mut sums = std::collections::BTreeMap::<u64, (f64, usize)>::new();
    for line in read(&dir.path().join("learning_curve.csv")).lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let e = sums.entry(f[2].parse().unwrap()).or_default();
        e.0 += f[4].parse::<f64>().unwrap();
        e.1 += 1;
    }
    let agg = read(&dir.path().join("aggregated_curve.csv"));
    assert_eq!(agg.lines().next().unwrap(), "variant,iteration,replications,mean_score,sd_between_replications");
    for line in agg.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (sum, n) = sums[&f[1].parse::<u64>().unwrap()];
        assert_eq!(f[2].parse::<usize>().unwrap(), n);
        assert!((f[3].parse::<f64>().unwrap() - sum / n as f64).abs() < 1e-9);
    }
}

fn snapshot(dir: &Path) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for sub in [dir.to_path_buf(), dir.join("traces")] {
        for entry in fs::read_dir(&sub).unwrap() {
            let p = entry.unwrap().path();
            if p.is_file() {
                files.push((p.strip_prefix(dir).unwrap().display().to_string(), read(&p)));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical_and_replications_independent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&small_config(a.path(), "m_stew_cv, lfd_only", 2)).unwrap();
    let mut cfg = small_config(b.path(), "m_stew_cv, lfd_only", 2);
    cfg.parallelism = 3;
    run_experiment(&cfg).unwrap();
    assert_eq!(snapshot(a.path()), snapshot(b.path()));

    // a replication's trace does not depend on which other runs share the experiment
    let c = tempfile::tempdir().unwrap();
    run_experiment(&small_config(c.path(), "lfd_only", 1)).unwrap();
    assert_eq!(
        read(&a.path().join("traces/lfd_only_r0.csv")),
        read(&c.path().join("traces/lfd_only_r0.csv"))
    );
}

#[test]
fn unknown_config_keys_fail_fast() {
    let err = ExperimentConfig::parse("replications = 2\nlambda = 3\nseed = 1\n").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("lambda") && msg.contains("seed"), "{msg}");
}

#[test]
fn unwritable_output_dir_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = small_config(&blocker.join("sub"), "lfd_only", 1);
    assert!(run_experiment(&cfg).is_err());
}
