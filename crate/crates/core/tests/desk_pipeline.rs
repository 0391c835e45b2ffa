use rrv_core::generate::{random_network, Shape};
use rrv_core::metrics::Bound;
use rrv_core::pipeline::{evaluate_instance, PipelineConfig};
use rrv_core::planner::SaConfig;

fn quick(seed: u64) -> PipelineConfig {
    PipelineConfig {
        sa: SaConfig { restarts: 3, iterations_per_temperature: 60, ..SaConfig::with_seed(seed) },
        ..PipelineConfig::new(seed)
    }
}

#[test]
fn ordering_and_bound_over_desk_scenarios() {
    let mut scenarios = 0;
    let mut bounded = 0;
    let mut violations = Vec::new();
    for seed in 0..40u64 {
        let k = 2 + (seed % 2) as usize;
        let net = random_network(seed, &Shape::desk(6 + (seed % 3) as usize, 9, k)).unwrap();
        let out = evaluate_instance(&net, &quick(seed)).unwrap();
        let opt = out.opt.as_ref().expect("desk scale").beta;
        for s in &out.scenarios {
            scenarios += 1;
            let opt_f = s.opt_f.as_ref().unwrap().beta;
            let ca = s.report.beta_ca;
            if !(opt <= opt_f && opt_f <= ca) {
                violations.push(format!("seed {seed} {}: opt {opt} opt_f {opt_f} ca {ca}", s.scenario.name));
            }
            if let Some(Bound::Value(b)) = &s.metrics.rho_bound {
                bounded += 1;
                let rho = s.metrics.rho().unwrap();
                if rho > *b {
                    violations.push(format!("seed {seed} {}: rho {rho} > bound {b}", s.scenario.name));
                }
            }
        }
    }
    eprintln!("{scenarios} scenarios, {bounded} bounded");
    assert!(violations.is_empty(), "{violations:#?}");
}
