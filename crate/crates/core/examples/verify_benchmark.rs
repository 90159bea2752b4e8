//! Solves and verifies the four built-in stages, printing every check.

use seqtunnel::config::RunConfig;
use seqtunnel::verify::verify_all;

fn main() {
    let cfg = RunConfig::benchmark();
    let stages = cfg.stages().expect("benchmark geometry");
    let report = verify_all(&cfg, &stages);
    for s in &report.stages {
        println!("stage {} (sample count {}, {} iterations)", s.stage, s.sample_count, s.iterations_used);
        for c in &s.checks {
            println!("  {:<28} {:>12.4e}  limit {:>10.3e}  {:?}", c.name, c.value, c.threshold, c.status);
        }
    }
    print!("{}", report.summary());
}
