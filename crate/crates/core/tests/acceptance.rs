use std::process::ExitCode;

use fracrisk::acceptance::{run_with, Level};
use fracrisk::McConfig;

fn main() -> ExitCode {
    let level = match std::env::var("FRACRISK_ACCEPTANCE").as_deref() {
        Ok("quick") => Level::Quick,
        _ => Level::Full,
    };
    let report = run_with(level, &McConfig::new(20_240_601), |c| println!("{c}"));
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    println!(
        "acceptance ({level:?}): {} passed, {failed} failed",
        report.checks.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
