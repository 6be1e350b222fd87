//! Command-line entry point: parse the configuration, run the sweep, write
//! CSV results. Exit codes: 0 on success, 2 on configuration errors, 1 on
//! any failure after the configuration was accepted.

use std::process::ExitCode;
use std::time::Instant;

use fmamimo::montecarlo::run_simulation;
use fmamimo::output::{write_all, write_config_snapshot};
use fmamimo::parse_cli;

fn main() -> ExitCode {
    let run = match parse_cli(std::env::args_os().skip(1)) {
        Ok(run) => run,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };

    let started = Instant::now();
    let result = match run_simulation(&run.config) {
        Ok(result) => result,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(1);
        }
    };

    let written = write_all(&result, &run.out_dir)
        .and_then(|mut paths| {
            paths.push(write_config_snapshot(&run.config, &run.out_dir)?);
            Ok(paths)
        });
    match written {
        Ok(paths) => {
            let n_samples: usize =
                result.per_point.values().map(|cdf| cdf.len()).sum();
            println!(
                "wrote {} files to {} ({} CDF samples, {} skipped evaluations, {:.2} s)",
                paths.len(),
                run.out_dir.display(),
                n_samples,
                result.skipped_records,
                started.elapsed().as_secs_f64()
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
