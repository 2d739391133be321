use std::env;
use std::fs;
use std::path::Path;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").expect("cargo sets CARGO_MANIFEST_DIR");
    let header = Path::new(&crate_dir).join("include").join("fuzzseg.h");
    let mut buf = Vec::new();
    cbindgen::generate(&crate_dir)
        .expect("cbindgen generates the header")
        .write(&mut buf);
    // rewrite only on change so incremental builds stay quiet
    if fs::read(&header).ok().as_deref() != Some(buf.as_slice()) {
        fs::create_dir_all(header.parent().expect("header path has a parent"))
            .expect("include directory is writable");
        fs::write(&header, &buf).expect("header is writable");
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
