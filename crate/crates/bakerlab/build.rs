fn main() {
    // System OpenBLAS provides both the BLAS and LAPACK symbols.
    println!("cargo:rustc-link-lib=openblas");
}
