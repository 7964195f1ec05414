// mdbook cannot run listings that depend on workspace crates, so each chapter
// is pulled in as module docs and `cargo test --doc` runs its code blocks.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/configuration.md")]
pub mod configuration {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}
#[doc = include_str!("../../../book/src/residuals.md")]
pub mod residuals {}
#[doc = include_str!("../../../book/src/refinement.md")]
pub mod refinement {}
#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}

#[cfg(test)]
mod tests {
    use std::fs;
    use std::path::Path;

    // every chapter listed in SUMMARY.md must be included above
    #[test]
    fn summary_chapters_are_tested() {
        let book = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../book/src");
        let summary = fs::read_to_string(book.join("SUMMARY.md")).unwrap();
        let lib = include_str!("lib.rs");
        for line in summary.lines() {
            if let Some(start) = line.find("](") {
                let file = &line[start + 2..line.len() - 1];
                assert!(book.join(file).is_file(), "{file}");
                assert!(lib.contains(&format!("book/src/{file}\")")), "{file} is not doc-tested");
            }
        }
    }
}
