//! Diagnostics and snapshot emission.

use sg_core::grid::{write_snapshot, State};
use sg_core::integrators::StepDiagnostics;
use std::io::{BufWriter, Write};
use std::path::Path;

/// CSV with one row per recorded step; real columns keep 17 significant
/// digits so a parse-back reproduces the binary values exactly. A run that
/// died early appends `# aborted at step <n>` after the partial data.
pub fn emit_diagnostics(
    diags: &[StepDiagnostics],
    aborted_at: Option<usize>,
    path: &Path,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "step,time,energy,energy_error,multiplier,newton_iters")?;
    for d in diags {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            d.step, d.time, d.energy, d.energy_error, d.multiplier, d.newton_iters
        )?;
    }
    if let Some(step) = aborted_at {
        writeln!(w, "# aborted at step {step}")?;
    }
    w.flush()
}

/// Write `<base>_u.csv` and `<base>_v.csv` in the snapshot format.
pub fn emit_snapshot(state: &State, t: f64, base: &Path) -> sg_core::Result<()> {
    let with_suffix = |sfx: &str| {
        let mut name = base.file_name().unwrap_or_default().to_os_string();
        name.push(sfx);
        base.with_file_name(name)
    };
    write_snapshot(&state.u, t, &with_suffix("_u.csv"))?;
    write_snapshot(&state.v, t, &with_suffix("_v.csv"))
}
