use std::path::{Path, PathBuf};
use std::process::Command;

const HEADER: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/include/tclose.h");

const EXPORTS: &[&str] = &[
    "tc_last_error",
    "tc_version",
    "tc_limits_default",
    "tc_table_from_csv",
    "tc_table_free",
    "tc_table_rows",
    "tc_table_columns",
    "tc_space_equal",
    "tc_space_four_point",
    "tc_space_parse",
    "tc_space_free",
    "tc_emd",
    "tc_solve_tclose",
    "tc_solve_kanon",
    "tc_solve_2diversity",
    "tc_solution_free",
    "tc_solution_feasible",
    "tc_solution_cost",
    "tc_solution_group_count",
    "tc_solution_assignment",
    "tc_solution_to_string",
    "tc_string_free",
];

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "tclose.h"

int main(void) {
    const char *csv = "qi:zip,qi:age,sa:d\n4760,21,flu\n4767,23,cold\n4791,31,flu\n4792,35,cold\n";
    TcTable *table = NULL;
    if (tc_table_from_csv(csv, false, &table) != TC_STATUS_OK) return 10;
    TcSolution *sol = NULL;
    if (tc_solve_kanon(table, 2, TC_ALGORITHM_EXACT, NULL, &sol) != TC_STATUS_OK) return 11;
    uint64_t cost = 0;
    if (tc_solution_cost(sol, &cost) != TC_STATUS_OK) return 12;
    if (tc_solution_group_count(sol) == 0) return 15;
    printf("cost=%llu\n", (unsigned long long)cost);
    tc_solution_free(sol);
    if (tc_solve_kanon(table, 0, TC_ALGORITHM_EXACT, NULL, &sol) != TC_STATUS_OUT_OF_RANGE) return 13;
    if (strlen(tc_last_error()) == 0) return 14;
    tc_table_free(table);
    return 0;
}
"#;

fn header() -> String {
    std::fs::read_to_string(HEADER).expect("header is generated by the build script")
}

fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn declares_every_export() {
    let h = header();
    for name in EXPORTS {
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
    for item in ["typedef struct TcTable TcTable", "TC_STATUS_TOO_LARGE", "TC_ALGORITHM_MILP", "TcLimits"] {
        assert!(h.contains(item), "{item} missing from header");
    }
}

#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipped: no C compiler");
        return;
    }
    let lib = profile_dir().join("libtclose_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(HEADER).parent().unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "cc failed: {}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout), "cost=8\n");
}
