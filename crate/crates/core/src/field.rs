//! Scalar fields on the cone, with batched evaluation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;

pub trait ScalarField: Sync {
    fn eval(&self, y: &SpdMatrix) -> Result<Complex64>;

    /// Evaluates many points at once; fields with an expensive shared setup
    /// (such as a coset enumeration) override this.
    fn eval_many(&self, ys: &[SpdMatrix]) -> Result<Vec<Complex64>> {
        ys.iter().map(|y| self.eval(y)).collect()
    }
}

impl<F> ScalarField for F
where
    F: Fn(&SpdMatrix) -> Result<Complex64> + Sync,
{
    fn eval(&self, y: &SpdMatrix) -> Result<Complex64> {
        self(y)
    }
}

struct Recorder {
    points: Mutex<Vec<SpdMatrix>>,
}

impl ScalarField for Recorder {
    fn eval(&self, y: &SpdMatrix) -> Result<Complex64> {
        self.points.lock().unwrap().push(y.clone());
        Ok(Complex64::new(1.0, 0.0))
    }
}

struct Replayer {
    values: Vec<Complex64>,
    next: AtomicUsize,
}

impl ScalarField for Replayer {
    fn eval(&self, _: &SpdMatrix) -> Result<Complex64> {
        let i = self.next.fetch_add(1, Ordering::SeqCst);
        self.values.get(i).copied().ok_or_else(|| Error::Invalid("batched evaluation diverged from its recording".into()))
    }
}

/// Runs `compute` twice: once against a recorder to learn which points it
/// needs, then against the real values obtained in one `eval_many` call.
/// `compute` must request points in a value-independent, sequential order.
pub fn batched<T>(field: &dyn ScalarField, compute: impl Fn(&dyn ScalarField) -> Result<T>) -> Result<T> {
    let rec = Recorder { points: Mutex::new(Vec::new()) };
    // Errors in the dry run come from the dummy values, not the field.
    let _ = compute(&rec);
    let points = rec.points.into_inner().unwrap();
    let values = field.eval_many(&points)?;
    let rep = Replayer { values, next: AtomicUsize::new(0) };
    compute(&rep)
}
