//! `homlab check-matrix`: print unitarity, exchange products, and the
//! phase classification of a setup matrix.

use std::path::Path;

use homlab::io::TransferMatrixFile;
use homlab::optics::{classify_phase_condition, exchange_products, TransferMatrix};
use homlab::tol;

use crate::config::{self, read_json};
use crate::{CliError, CliResult};

pub fn run(matrix_path: Option<&Path>, config_path: Option<&Path>) -> CliResult<()> {
    let matrix = match (matrix_path, config_path) {
        (Some(path), None) => {
            let file: TransferMatrixFile = read_json(path)?;
            file.into_matrix()
                .map_err(|e| CliError::physics(format!("{}: {e}", path.display())))?
        }
        (None, Some(path)) => {
            let (cfg, bytes) = config::load_config(path)?;
            let dir = path.parent().unwrap_or_else(|| Path::new("."));
            config::prepare(cfg, bytes, dir)?.matrix
        }
        _ => {
            return Err(CliError::config(
                "check-matrix needs exactly one of --matrix or --config",
            ))
        }
    };
    print_report(&matrix);
    Ok(())
}

fn print_report(matrix: &TransferMatrix) {
    let m = matrix.mode_count();
    println!("modes: {m}");
    println!(
        "input labels: {}",
        matrix
            .input_labels()
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!(
        "output labels: {}",
        matrix
            .output_labels()
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!("unitarity defect: {:.3e}", matrix.unitarity_defect());
    println!("unitary: {}", matrix.is_unitary());
    println!("max singular value: {:.12}", matrix.max_singular_value());
    if m != 2 {
        println!("exchange products: defined for two-port matrices only");
        return;
    }
    let k = exchange_products(matrix).expect("two-port matrix");
    for alpha in 1..=2usize {
        for beta in 1..=2usize {
            let z = k.at(alpha, beta);
            println!("K[{alpha}][{beta}] = {:+.12e} {:+.12e}i", z.re, z.im);
        }
    }
    match classify_phase_condition(matrix, tol::CLASSIFY_TOL) {
        Ok(class) => println!("classification: {class}"),
        Err(e) => println!("classification: unavailable ({e})"),
    }
}
