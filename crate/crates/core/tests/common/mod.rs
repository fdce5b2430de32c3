#![allow(dead_code)]

use std::sync::OnceLock;

use rotspec::geometry::RotationParams;
use rotspec::ivp::IntegratorConfig;
use rotspec::profile::{solve_periodic, PeriodicProfile, ShootingProblem};

/// Reference `(n, a0, T)` values for the l = 1 family.
pub const L1_TABLE: [(u32, f64, f64); 47] = [
    (4, 0.16854, 2.17363),
    (5, 0.149713, 2.02932),
    (6, 0.135385, 1.90413),
    (7, 0.124316, 1.79709),
    (8, 0.115504, 1.70510),
    (9, 0.108296, 1.62530),
    (10, 0.102268, 1.55538),
    (11, 0.097135, 1.49355),
    (12, 0.0926974, 1.43840),
    (13, 0.0888125, 1.38884),
    (14, 0.0853753, 1.34401),
    (15, 0.0823064, 1.30320),
    (16, 0.0795448, 1.26587),
    (17, 0.0770425, 1.23154),
    (18, 0.0747616, 1.19984),
    (19, 0.0726714, 1.17046),
    (20, 0.0707467, 1.14312),
    (21, 0.0689668, 1.11760),
    (22, 0.0673145, 1.09371),
    (23, 0.0657754, 1.07128),
    (24, 0.0643369, 1.05017),
    (25, 0.0629888, 1.03026),
    (26, 0.0617218, 1.01143),
    (27, 0.0605282, 0.993601),
    (28, 0.0594012, 0.976678),
    (29, 0.0583348, 0.960589),
    (30, 0.0573239, 0.945268),
    (31, 0.0563636, 0.930655),
    (32, 0.0554500, 0.916699),
    (33, 0.0545793, 0.903351),
    (34, 0.0537484, 0.890568),
    (35, 0.0529543, 0.878313),
    (36, 0.0521943, 0.866549),
    (37, 0.0514662, 0.855244),
    (38, 0.0507676, 0.844371),
    (39, 0.0500968, 0.833901),
    (40, 0.0494518, 0.823810),
    (41, 0.0488311, 0.814077),
    (42, 0.0482332, 0.804681),
    (43, 0.0476567, 0.795602),
    (44, 0.0471004, 0.786823),
    (45, 0.0465631, 0.778329),
    (46, 0.0460438, 0.770103),
    (47, 0.0455414, 0.762133),
    (48, 0.0450552, 0.754405),
    (49, 0.0445842, 0.746907),
    (50, 0.0441276, 0.739628),
];

pub fn solve(k: u32, l: u32) -> PeriodicProfile {
    let params = RotationParams::new(k, l).unwrap();
    let problem =
        ShootingProblem::with_default_bracket(params, IntegratorConfig::default()).unwrap();
    solve_periodic(&problem).unwrap()
}

/// n = 5, k = 3, l = 1.
pub fn example1() -> &'static PeriodicProfile {
    static P: OnceLock<PeriodicProfile> = OnceLock::new();
    P.get_or_init(|| solve(3, 1))
}

/// n = 5, k = l = 2.
pub fn example2() -> &'static PeriodicProfile {
    static P: OnceLock<PeriodicProfile> = OnceLock::new();
    P.get_or_init(|| solve(2, 2))
}
