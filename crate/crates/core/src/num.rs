//! Floating-point scalar abstraction: the learning and simulation modules
//! are generic over `Real`, instantiated as f32 or f64. Exact-arithmetic
//! modules use [`crate::Rat`] instead.

/// Scalar for log-domain weights, value tables, and Monte Carlo statistics.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + std::fmt::Debug
    + Send
    + Sync
    + 'static
{
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 conversion")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize fits scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}
