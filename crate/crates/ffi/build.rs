use std::env;
use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=build.rs");

    let mut config = cbindgen::Config { language: cbindgen::Language::C, include_guard: Some("SWL_H".into()), cpp_compat: true, ..Default::default() };
    config.enumeration.prefix_with_name = true;
    config.enumeration.rename_variants = cbindgen::RenameRule::ScreamingSnakeCase;
    config.style = cbindgen::Style::Both;
    config.autogen_warning = Some("/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */".into());

    match cbindgen::Builder::new().with_crate(&dir).with_config(config).generate() {
        Ok(b) => {
            b.write_to_file(dir.join("include/swl.h"));
        }
        Err(e) => println!("cargo:warning=header generation skipped: {e}"),
    }
}
