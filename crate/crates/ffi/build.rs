fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("manifest dir");
    let header = std::path::Path::new(&crate_dir)
        .join("include")
        .join("airyedge.h");
    std::fs::create_dir_all(header.parent().unwrap()).expect("include dir");
    cbindgen::generate(&crate_dir)
        .expect("header generation")
        .write_to_file(&header);
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
