//! Driving an experiment from configuration text, as the command-line tool
//! does.

use multitime::cli::run;
use multitime::config::{Experiment, RunConfig};

fn main() {
    let dir = std::env::temp_dir().join("multitime-run-config-example");
    let text = format!(
        "# Compton bounce with two starting points\n\
         experiment = trajectories\n\
         q0 = 0.02 0.98, 0.05 0.95\n\
         csv_stride = 100\n\
         output = {}\n",
        dir.display()
    );
    let cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    match run(&cfg, cfg.experiment.unwrap_or(Experiment::Trajectories)) {
        Ok(files) => files.iter().for_each(|f| println!("wrote {}", f.display())),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code().into());
        }
    }
    // Parse errors carry their position.
    if let Err(e) = RunConfig::parse("omega = 2\ndt = fast\n") {
        println!("example parse error: {e}");
    }
}
