//! Criterion benchmarks for the estimator, optimizer and MLE baseline.
