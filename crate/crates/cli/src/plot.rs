use std::path::{Path, PathBuf};

use crate::commands::CliError;

const TEMPLATE: &str = r#"# Plots per-cell means from a linform trials CSV.
# Needs pandas and matplotlib.
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

HERE = Path(__file__).resolve().parent
trials = pd.read_csv(HERE / "@CSV@")

fig, ax = plt.subplots(figsize=(7, 4.5))
for (c, alpha), cell in trials.groupby(["c", "alpha"]):
    by_n = cell.groupby("n")
    if cell["image_size"].notna().any():
        rng = cell["image_size"] + cell["complement_size"]
        frac = (cell["image_size"] / rng).groupby(cell["n"]).mean()
        ax.plot(frac.index, frac.values, marker="o", label=f"c={c}, alpha={alpha}")
        ax.set_ylabel("mean |L(A)| / range size")
    else:
        size = by_n["subset_size"].mean()
        ax.plot(size.index, size.values, marker="o", label=f"c={c}, alpha={alpha}")
        ax.set_ylabel("mean |A|")
ax.set_xscale("log")
ax.set_xlabel("N")
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "@PNG@", dpi=150)
"#;

/// Writes `plot_<stem>.py` beside the CSV, reading it by file name relative to the script.
pub fn write_script(csv_path: &Path) -> Result<PathBuf, CliError> {
    let name = csv_path.file_name().and_then(|s| s.to_str()).unwrap_or("trials.csv");
    let stem = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("trials");
    let dir = csv_path.parent().unwrap_or(Path::new(""));
    let script = dir.join(format!("plot_{stem}.py"));
    let body = TEMPLATE.replace("@CSV@", name).replace("@PNG@", &format!("{stem}.png"));
    std::fs::write(&script, body).map_err(|source| CliError::Io { path: script.clone(), source })?;
    Ok(script)
}
