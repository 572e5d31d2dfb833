//! Asymptotic-relative-efficiency table of the inverse-norm max test
//! against the mean-based and pure-sign max tests, with a Monte Carlo
//! cross-check of one column.
//!
//! ```bash
//! cargo run --release --example are_table
//! ```

use hdloc::are::{are_report, are_table, format_table, reference_laws};
use hdloc::{AreMode, RadialLaw, Result};

fn main() -> Result<()> {
    let reports = are_table(&reference_laws(), AreMode::ClosedForm)?;
    print!("{}", format_table(&reports));

    // MC cross-check of the t(4) column
    let law = RadialLaw::t(4.0)?;
    let mc = are_report(&law, AreMode::Mc { draws: 1_000_000, seed: 7 })?;
    let se = mc.mc_stderr.expect("mc mode reports stderrs");
    println!("\nmonte carlo cross-check, {law} with 1e6 draws:");
    println!(
        "  ARE(IN-MAX,MAX)    = {:.4} +- {:.4}",
        mc.values.in_vs_max, se.in_vs_max
    );
    println!(
        "  ARE(IN-MAX,SS-MAX) = {:.4} +- {:.4}",
        mc.values.in_vs_ss, se.in_vs_ss
    );
    println!(
        "  ARE(SS-MAX,MAX)    = {:.4} +- {:.4}",
        mc.values.ss_vs_max, se.ss_vs_max
    );
    Ok(())
}
