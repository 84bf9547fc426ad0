#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use clozegen::wordnet::KnowledgeBase;

pub fn wordnet_dir() -> PathBuf {
    std::env::var_os("WORDNET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/wordnet"))
}

/// The shared WordNet 3.0 database. Run `scripts/fetch-wordnet.sh` first.
pub fn kb() -> Arc<KnowledgeBase> {
    static KB: OnceLock<Arc<KnowledgeBase>> = OnceLock::new();
    KB.get_or_init(|| {
        let dir = wordnet_dir();
        Arc::new(KnowledgeBase::load(&dir).unwrap_or_else(|e| {
            panic!(
                "WordNet 3.0 not loadable from {} ({e}); run scripts/fetch-wordnet.sh",
                dir.display()
            )
        }))
    })
    .clone()
}
