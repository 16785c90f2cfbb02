#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

pub fn run_cli(args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modulaire"))
        .args(args)
        .env_remove("MODULAIRE_TOL")
        .output()
        .expect("spawn modulaire")
}

/// One invocation of the CLI corpus and the exit status it must produce.
pub struct Case {
    pub args: Vec<String>,
    pub exit: i32,
}

fn case(exit: i32, parts: &[&str]) -> Case {
    let args = parts
        .iter()
        .map(|p| match p.strip_prefix('@') {
            Some(name) => fixture(name),
            None => p.to_string(),
        })
        .collect();
    Case { args, exit }
}

pub fn corpus() -> Vec<Case> {
    vec![
        case(0, &["commutant", "--in", "@m3_generators.json"]),
        case(0, &["commutant", "--in", "@diag_aab_generators.json"]),
        case(0, &["analyze", "--in", "@diag_aab_generators.json"]),
        case(0, &["pvm", "--in", "@sigma_x.json"]),
        case(0, &["equiv", "--p", "@e11.json", "--q", "@p_ones.json"]),
        case(0, &["equiv", "--p", "@r_diag001.json", "--q", "@q_diag110.json"]),
        case(
            0,
            &[
                "equiv",
                "--p",
                "@r_diag001.json",
                "--q",
                "@q_diag110.json",
                "--blocks",
                "2,1",
            ],
        ),
        case(
            0,
            &["minimal", "--projector", "@e11.json", "--in", "@m3_generators.json"],
        ),
        case(0, &["schmidt", "--state", "@schmidt_two_thirds.json"]),
        case(0, &["entropy", "--state", "@bell.json"]),
        case(0, &["entropy", "--state", "@schmidt_two_thirds.json"]),
        case(0, &["entropy", "--density", "@density_half.json"]),
        case(0, &["rel-entropy", "--psi", "@bell.json", "--phi", "@phi_third.json"]),
        case(
            0,
            &[
                "rel-entropy",
                "--psi",
                "@bell.json",
                "--phi",
                "@phi_third.json",
                "--slot",
                "2",
            ],
        ),
        case(
            0,
            &[
                "rel-entropy",
                "--psi",
                "@schmidt_two_thirds.json",
                "--phi",
                "@product_state.json",
            ],
        ),
        case(0, &["modular", "--state", "@schmidt_two_thirds.json"]),
        case(
            0,
            &[
                "flow",
                "--state",
                "@schmidt_two_thirds.json",
                "--op",
                "@e12_2x2.json",
                "--s",
                "-0.5",
            ],
        ),
        case(0, &["factor-lab", "--config", "@lambda_half.json"]),
        case(0, &["factor-lab", "--config", "@lambda_one.json"]),
        case(0, &["factor-lab", "--config", "@alternating.json"]),
        case(0, &["sector", "--config", "@sector_cos30.json"]),
        case(0, &["sector", "--config", "@sector_inverse_square.json"]),
        case(2, &["entropy", "--density", "@density_bad_trace.json"]),
        case(2, &["entropy", "--density", "@malformed_pair.json"]),
        case(2, &["entropy", "--density", "@broken.json"]),
        case(2, &["modular", "--state", "@product_state.json"]),
        case(2, &["modular", "--state", "@state_2x3.json"]),
        case(2, &["schmidt", "--state", "@state_wrong_length.json"]),
        case(2, &["equiv", "--p", "@e11.json", "--q", "@sigma_x.json"]),
        case(2, &["commutant", "--in", "@missing.json"]),
    ]
}
