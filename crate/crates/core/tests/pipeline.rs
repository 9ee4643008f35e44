use fogcache::experiment::{read_csv, run_experiment, write_csv, Clustering, ExperimentSpec, SweepAxis};
use fogcache::params::units;
use fogcache::rng::substream;
use fogcache::{generate_scenario, CacheMatrix, Evaluator, LinkRateTable, Partition, SchemeId, SystemParams};
use rand::Rng;

#[test]
fn spec_file_resolves_base_config_and_sections() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("base.toml"),
        "num_faps = 5\nnum_users = 20\nnum_contents = 40\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("spec.toml"),
        r#"
base_config = "base.toml"
seeds = [4, 5]
schemes = ["greedy_local", "improved_fa"]
clustering = "whole_set"
output = "out/res.csv"

[sweep]
axis = "capacity"
values = [1, 2]

[fa]
population = 5
max_iters = 3
"#,
    )
    .unwrap();
    let spec = ExperimentSpec::load(dir.path().join("spec.toml")).unwrap();
    assert_eq!(spec.params.num_faps, 5);
    assert_eq!(spec.clustering, Clustering::WholeSet);
    assert_eq!(spec.sweep.axis, SweepAxis::Capacity);
    assert_eq!(spec.output.as_deref(), Some(dir.path().join("out/res.csv").as_path()));
    assert_eq!(spec.fa.max_iters, 3);

    let out = run_experiment(&spec).unwrap();
    assert_eq!(out.rows.len(), 8);
    assert!(out.rows.iter().all(|r| r.num_clusters == 1 && r.hcg_passes == 0));
    assert_eq!(out.rows[0].c_bits, units::gb_to_bits(1.0));
    assert_eq!(out.rows[7].c_bits, units::gb_to_bits(2.0));

    let path = dir.path().join("res.csv");
    write_csv(&out.rows, &path).unwrap();
    let back = read_csv(&path).unwrap();
    for (a, b) in back.iter().zip(&out.rows) {
        for (x, y) in [
            (a.delay_seconds, b.delay_seconds),
            (a.energy_joules, b.energy_joules),
            (a.objective, b.objective),
        ] {
            assert!((x - y).abs() <= 1e-12 * y.abs());
        }
    }
    assert_eq!(back, out.rows);
}

#[test]
fn missing_or_malformed_specs_error() {
    assert!(ExperimentSpec::load("/nonexistent/spec.toml").is_err());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "seeds = []\nschemes = [\"random\"]\n").unwrap();
    assert!(ExperimentSpec::load(&p).is_err());
    std::fs::write(
        &p,
        "seeds = [1]\nschemes = [\"random\"]\n[sweep]\naxis = \"bandwidth\"\nvalues = [1]\n",
    )
    .unwrap();
    assert!(ExperimentSpec::load(&p).is_err());
}

#[test]
fn whole_set_never_slower_than_singletons() {
    for seed in 0..10u64 {
        let params = SystemParams {
            num_faps: 6,
            num_users: 30,
            num_contents: 25,
            capacity: 12e9,
            ..Default::default()
        };
        let scn = generate_scenario(&params, seed).unwrap();
        let rates = LinkRateTable::compute(&scn);
        let (single, whole) = (Partition::singletons(6), Partition::whole(6));
        let (es, ew) = (
            Evaluator::new(&scn, &rates, &single),
            Evaluator::new(&scn, &rates, &whole),
        );
        let mut rng = substream(seed, &[99]);
        for _ in 0..20 {
            let mut x = CacheMatrix::zeros(6, 25);
            for m in 0..6 {
                for f in 0..25 {
                    x.set(m, f, rng.random_bool(0.15));
                }
            }
            assert!(ew.evaluate(&x).delay <= es.evaluate(&x).delay * (1.0 + 1e-12));
        }
    }
}

#[test]
fn exhaustive_scheme_is_best_in_every_cell() {
    let params = SystemParams {
        num_faps: 3,
        num_users: 9,
        num_contents: 5,
        capacity: 8e9,
        ..Default::default()
    };
    let mut spec = ExperimentSpec::new(params, vec![1, 2, 3], SchemeId::ALL.to_vec());
    spec.fa.population = 10;
    spec.fa.max_iters = 20;
    let rows = run_experiment(&spec).unwrap().rows;
    for cell in rows.chunks(4) {
        let oracle = cell
            .iter()
            .find(|r| r.scheme == SchemeId::Exhaustive)
            .unwrap()
            .objective;
        assert!(cell.iter().all(|r| r.objective >= oracle));
    }
}
