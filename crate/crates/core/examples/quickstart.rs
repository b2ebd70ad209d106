//! Minimal end-to-end use of the library: normalize a document, count
//! co-occurrences, and estimate the bias of one context word.

use std::collections::BTreeSet;

use pmibias::{
    build_contingency, build_vocabulary, count_target_contexts, estimate, preprocess,
    CooccurConfig, EstimateOptions, RawDocument, RowGroup, TargetSet,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let raw = RawDocument {
        id: "doc".into(),
        text: "She is a nurse. He is a doctor. She met a doctor.".into(),
    };
    let docs = [preprocess(&raw, 1).expect("document long enough")];
    let vocab = build_vocabulary(docs.iter(), 1)?;
    let sets = [TargetSet::new("A", ["she"]), TargetSet::new("B", ["he"])];
    let counts = count_target_contexts(docs.iter(), &sets, &CooccurConfig::default(), &vocab)?;

    let context: BTreeSet<String> = ["doctor".to_string()].into();
    let table = build_contingency(
        &counts,
        &RowGroup::single("A"),
        &RowGroup::single("B"),
        "doctor",
        &context,
        |w| vocab.contains(w),
    )?;
    let est = estimate(&table, &EstimateOptions::default())?;
    println!("bias {:.4} ± {:.4}", est.bias, est.se);
    Ok(())
}
