//! MNIST ingestion, toy datasets, batching and file output.

mod dataset;
mod idx;
mod output;

pub use dataset::{linearly_separable, load_mnist, take_subset, Batcher, Dataset, Split};
pub use idx::{
    encode_idx_images, encode_idx_labels, load_idx_images, load_idx_labels, parse_idx_images,
    parse_idx_labels, IdxImages, IMAGES_MAGIC, LABELS_MAGIC,
};
pub use output::{
    encode_pgm, read_csv, read_csv_metrics, to_gray, write_csv, write_csv_metrics, write_pgm,
    MetricRow, METRICS_HEADER,
};
