fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    #[cfg(feature = "generate-header")]
    {
        let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
        cbindgen::generate(&crate_dir)
            .expect("cbindgen failed; see cbindgen.toml")
            .write_to_file(std::path::Path::new(&crate_dir).join("include/landscape_lab.h"));
    }
}
