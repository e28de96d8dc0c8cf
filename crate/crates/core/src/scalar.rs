use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the closed-form evaluators are generic over.
pub trait Real: Float + FromPrimitive + std::fmt::Debug {
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable as scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}
