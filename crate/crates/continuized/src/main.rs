use std::process::ExitCode;

use continuized::harness::{
    aggregate, parse_cli, reproduce_figure, run_checks, run_experiment, CliAction,
};
use continuized::Error;

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 3,
        _ => 1,
    }
}

fn fail(err: &Error) -> u8 {
    eprintln!("{err}");
    exit_code_for(err)
}

fn main() -> ExitCode {
    let action = match parse_cli(std::env::args()) {
        Ok(action) => action,
        Err(err) => return ExitCode::from(fail(&err)),
    };
    let code = match action {
        CliAction::Help(text) => {
            println!("{text}");
            0
        }
        CliAction::Run(config) => match run_experiment(&config) {
            Ok(summary) => {
                let traces: usize = summary.methods.iter().map(|m| m.traces.len()).sum();
                println!(
                    "wrote {traces} trace file(s) for {} method(s) under {}",
                    summary.methods.len(),
                    config.out_dir.display()
                );
                0
            }
            Err(err) => fail(&err),
        },
        CliAction::Reproduce { which, out_dir, seed } => {
            match reproduce_figure(which, &out_dir, seed) {
                Ok(files) => {
                    for file in files {
                        println!("{}", file.display());
                    }
                    0
                }
                Err(err) => fail(&err),
            }
        }
        CliAction::Aggregate { trace_dir, out } => match aggregate(&trace_dir) {
            Ok(summary) => {
                let mut text = serde_json::to_string_pretty(&summary)
                    .expect("aggregate summaries always serialize");
                text.push('\n');
                match out {
                    Some(path) => match std::fs::write(&path, text) {
                        Ok(()) => {
                            println!("{}", path.display());
                            0
                        }
                        Err(source) => fail(&Error::Io { path, source }),
                    },
                    None => {
                        print!("{text}");
                        0
                    }
                }
            }
            Err(err) => fail(&err),
        },
        CliAction::Check { seed } => match run_checks(seed) {
            Ok(reports) => {
                let failed = reports.iter().filter(|r| !r.passed).count();
                for report in &reports {
                    let status = if report.passed { "PASS" } else { "FAIL" };
                    println!("{status} {}: {}", report.name, report.detail);
                }
                if failed == 0 {
                    println!("all {} checks passed", reports.len());
                    0
                } else {
                    println!("{failed} of {} checks failed", reports.len());
                    2
                }
            }
            Err(err) => fail(&err),
        },
    };
    ExitCode::from(code)
}
