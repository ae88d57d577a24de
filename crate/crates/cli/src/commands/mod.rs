pub mod bench;
pub mod compare;
pub mod counterexample;
pub mod poly;
pub mod purify;

use rayon::ThreadPool;

use crate::error::CliError;

pub fn pool(jobs: Option<usize>) -> Result<ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j);
    }
    b.build().map_err(|e| CliError::Validation(e.to_string()))
}
