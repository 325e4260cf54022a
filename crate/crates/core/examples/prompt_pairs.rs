//! Builds positive and negative subject pairs for a two-object prompt.
//!
//! ```text
//! cargo run --example prompt_pairs
//! ```

use uncage::{build_prompt_spec, ObjectEntry};

fn main() -> uncage::Result<()> {
    let spec = build_prompt_spec(&[
        ObjectEntry::new("apple", &["red"]),
        ObjectEntry::new("car", &["blue", "shiny"]),
    ])?;

    let label = |id| spec.subject(id).map_or("?", |s| s.label.as_str());
    for &o in &spec.objects {
        let pos: Vec<_> = spec
            .positives(o)
            .into_iter()
            .flatten()
            .map(|&s| label(s))
            .collect();
        let neg: Vec<_> = spec
            .negatives(o)
            .into_iter()
            .flatten()
            .map(|&s| label(s))
            .collect();
        println!("{:<6} P = {:?}  N = {:?}", label(o), pos, neg);
    }
    assert!(spec.validate().is_empty());
    Ok(())
}
