// SPDX-License-Identifier: Apache-2.0

//! Plot-ready CSV output. Numbers are written with 17 significant digits so
//! they round-trip exactly; any provenance lines are emitted first as `#`
//! comments.

use std::io::{self, Write};

use crate::evolve::EvolutionResult;
use crate::hardware::PhaseSchedule;
use crate::landau_zener::SweepRow;

/// Round-trip representation of `v` (17 significant digits).
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_header<W: Write>(out: &mut W, provenance: &[String]) -> io::Result<()> {
    for line in provenance {
        for l in line.lines() {
            writeln!(out, "# {l}")?;
        }
    }
    Ok(())
}

fn write_row<W: Write>(out: &mut W, values: impl IntoIterator<Item = f64>) -> io::Result<()> {
    let row: Vec<String> = values.into_iter().map(fmt_num).collect();
    writeln!(out, "{}", row.join(","))
}

/// Columns `tau` then one per recorded observable, in recording order.
pub fn write_evolution_csv<W: Write>(
    out: &mut W,
    result: &EvolutionResult,
    provenance: &[String],
) -> io::Result<()> {
    write_header(out, provenance)?;
    let names: Vec<&str> = std::iter::once("tau")
        .chain(result.observables.iter().map(|s| s.name.as_str()))
        .collect();
    writeln!(out, "{}", names.join(","))?;
    for (i, &tau) in result.times.iter().enumerate() {
        write_row(
            out,
            std::iter::once(tau).chain(result.observables.iter().map(|s| s.values[i])),
        )?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(
    out: &mut W,
    rows: &[SweepRow],
    provenance: &[String],
) -> io::Result<()> {
    write_header(out, provenance)?;
    writeln!(out, "alpha,gamma,p_excited_sim,p_excited_lz,abs_dev")?;
    for r in rows {
        write_row(
            out,
            [r.alpha, r.gamma, r.p_excited_sim, r.p_excited_lz, r.abs_dev],
        )?;
    }
    Ok(())
}

pub fn write_schedule_csv<W: Write>(
    out: &mut W,
    schedule: &PhaseSchedule,
    provenance: &[String],
) -> io::Result<()> {
    write_header(out, provenance)?;
    for (label, f) in &schedule.drive_frequencies {
        writeln!(out, "# drive {label} = {}", fmt_num(*f))?;
    }
    writeln!(out, "tau,phi1,phi2")?;
    for i in 0..schedule.tau.len() {
        write_row(out, [schedule.tau[i], schedule.phi1[i], schedule.phi2[i]])?;
    }
    Ok(())
}

/// Data rows of a CSV written by this module: comment lines and the column
/// header dropped.
pub fn numeric_rows(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}
