//! Built-in models: the 265-asset credit benchmark and the two-block model.

use serde::{Deserialize, Serialize};

use super::{BlockSpec, CrossSpec, Hierarchy};
use crate::error::Result;

/// European investment-grade industry block sizes (115 assets).
pub const INVESTMENT_GRADE_SIZES: [usize; 7] = [10, 20, 20, 5, 30, 15, 15];
/// European high-yield industry block sizes (100 assets).
pub const HIGH_YIELD_SIZES: [usize; 7] = [10, 20, 25, 15, 5, 10, 15];
pub const JAPAN_SIZE: usize = 50;

/// Correlation levels of the benchmark model.
///
/// `europe` (between the two European markets) and `industry` (between
/// industry blocks of one market) are free parameters; the
/// defaults 0.30 and 0.45 keep every level strictly nested.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkParams {
    pub industry_block: f64,
    pub japan: f64,
    pub industry: f64,
    pub europe: f64,
    pub investment_grade_japan: f64,
    pub high_yield_japan: f64,
}

impl Default for BenchmarkParams {
    fn default() -> Self {
        Self {
            industry_block: 0.7,
            japan: 0.6,
            industry: 0.45,
            europe: 0.30,
            investment_grade_japan: 0.15,
            high_yield_japan: 0.0,
        }
    }
}

impl BenchmarkParams {
    pub fn spec(&self) -> BlockSpec {
        let market = |label: &str, sizes: &[usize]| {
            BlockSpec::node(
                self.industry,
                sizes
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| {
                        BlockSpec::leaf(s, self.industry_block).labeled(&format!("{label}/{i}"))
                    })
                    .collect(),
            )
            .labeled(label)
        };
        let mut root = BlockSpec::node(
            self.europe,
            vec![
                market("eu-ig", &INVESTMENT_GRADE_SIZES),
                market("eu-hy", &HIGH_YIELD_SIZES),
                BlockSpec::leaf(JAPAN_SIZE, self.japan).labeled("japan"),
            ],
        )
        .labeled("root");
        root.rho = None;
        root.cross = vec![
            CrossSpec {
                between: [0, 1],
                rho: self.europe,
            },
            CrossSpec {
                between: [0, 2],
                rho: self.investment_grade_japan,
            },
            CrossSpec {
                between: [1, 2],
                rho: self.high_yield_japan,
            },
        ];
        root
    }
}

/// The 265-asset benchmark: two European markets of seven industries each
/// plus a Japanese block, with the default [`BenchmarkParams`].
pub fn benchmark_hierarchy() -> Hierarchy {
    benchmark_hierarchy_with(&BenchmarkParams::default())
        .expect("default benchmark levels are nested")
}

pub fn benchmark_hierarchy_with(params: &BenchmarkParams) -> Result<Hierarchy> {
    Hierarchy::from_spec(&params.spec())
}

/// Two equal blocks of `block_size` variables with within-block correlation
/// `rho` and zero correlation across.
pub fn two_block_hierarchy(block_size: usize, rho: f64) -> Result<Hierarchy> {
    Hierarchy::from_spec(&BlockSpec::node(
        0.0,
        vec![
            BlockSpec::leaf(block_size, rho),
            BlockSpec::leaf(block_size, rho),
        ],
    ))
}
