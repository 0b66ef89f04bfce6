//! Load a TOML config, run it, persist the run directory and read the
//! ledger back.

use std::path::Path;

use viscowave::integrator::RunOptions;
use viscowave::runner::{execute, load_config, persist, read_ledger};

fn main() -> viscowave::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/table_history.toml");
    let config = load_config(&path)?;
    let record = execute(&config, &RunOptions::default())?;
    let root = tempfile::tempdir()?;
    let paths = persist(&record, root.path(), false)?;
    println!("run directory {}", paths.dir.display());
    for entry in std::fs::read_dir(&paths.dir)? {
        let entry = entry?;
        println!("  {} ({} bytes)", entry.file_name().to_string_lossy(), entry.metadata()?.len());
    }
    let ledger = read_ledger(&paths.ledger)?;
    assert_eq!(ledger, record.output.ledger);
    println!("ledger read back: {} rows, identical to the in-memory ledger", ledger.len());
    match persist(&record, root.path(), false) {
        Err(e) => println!("second persist refused: {e}"),
        Ok(_) => unreachable!("an existing run directory is never overwritten silently"),
    }
    Ok(())
}
