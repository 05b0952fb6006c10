//! Machine translation evaluation: BLEU and chrF scoring with reproducibility
//! signatures, paired bootstrap significance testing, MBR and oracle system
//! combination, sentence matching diagnostics, Moses-compatible punctuation
//! normalization and report rendering.

pub mod combine;
pub mod corpus;
pub mod diagnostics;
pub mod external_scores;
pub mod metrics;
pub mod normalize;
pub mod report;
pub mod significance;
pub mod tokenize;
