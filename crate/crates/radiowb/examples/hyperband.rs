//! Hyperband over a toy objective: prints the bracket schedule and the
//! trials each bracket actually ran.

use std::collections::BTreeMap;

use radiowb_analytics::search::{
    hyperband_brackets, hyperband_total, hyperparameter_search, Config, Domain, SearchBudget, SearchSpace, Strategy,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (r, eta) = (81, 3);
    println!("bracket schedule for R={r}, eta={eta} (total {}):", hyperband_total(r, eta));
    for b in hyperband_brackets(r, eta) {
        println!("  s={} n={} r={}", b.s, b.n, b.r);
    }

    let mut domains = BTreeMap::new();
    domains.insert("c".to_string(), Domain::LogUniform { low: 1e-3, high: 1e3 });
    let space = SearchSpace { domains, queue: Vec::new() };
    // best near c = 10; more resource reduces the noise floor
    let objective = |c: &Config, resource: u64| Ok(-(c["c"].log10() - 1.0).abs() - 1.0 / resource as f64);
    let budget = SearchBudget { strategy: Strategy::Hyperband, max_resource: r, eta, total_budget: 5_000, seed: 1 };
    let out = hyperparameter_search(objective, &space, &budget)?;

    for b in &out.brackets {
        let ran = out.trials.iter().filter(|t| t.bracket == Some(b.s)).count();
        println!("bracket s={}: {ran} trials", b.s);
    }
    println!(
        "consumed {} resource units; best c = {:.3} (score {:.4})",
        out.consumed, out.best_config["c"], out.best_score
    );
    Ok(())
}
