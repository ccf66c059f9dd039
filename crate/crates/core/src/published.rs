//! Published reference values for the 16-run designs of the three-factor,
//! three-level models M1 to M4.
//!
//! Design tables list each support point with its replicate count under the
//! six criteria, in the column order D, A, DP, AP, C1, C2 (0 = not used).

/// Criterion labels in table column order.
pub const CRITERIA: [&str; 6] = ["D", "A", "DP", "AP", "C1", "C2"];

/// Model names in table column order.
pub const MODELS: [&str; 4] = ["M1", "M2", "M3", "M4"];

/// Runs per design.
pub const RUNS: usize = 16;

type Row = ([i8; 3], [u8; 6]);

pub const DESIGNS_M1: &[Row] = &[
    ([-1, -1, -1], [2, 3, 0, 0, 1, 2]),
    ([1, -1, -1], [2, 1, 4, 4, 2, 1]),
    ([-1, 1, -1], [2, 1, 4, 4, 2, 2]),
    ([1, 1, -1], [2, 3, 0, 0, 1, 1]),
    ([-1, -1, 1], [2, 1, 4, 4, 2, 1]),
    ([1, -1, 1], [2, 3, 0, 0, 1, 1]),
    ([-1, 1, 1], [2, 3, 0, 0, 1, 2]),
    ([1, 1, 1], [2, 1, 4, 4, 2, 1]),
    ([0, -1, 1], [0, 0, 0, 0, 1, 1]),
    ([1, 0, -1], [0, 0, 0, 0, 1, 1]),
    ([0, 1, 1], [0, 0, 0, 0, 1, 0]),
    ([0, -1, -1], [0, 0, 0, 0, 0, 1]),
    ([-1, 0, -1], [0, 0, 0, 0, 1, 0]),
    ([1, 0, 1], [0, 0, 0, 0, 0, 1]),
    ([1, 1, 0], [0, 0, 0, 0, 0, 1]),
];

pub const DESIGNS_M2: &[Row] = &[
    ([-1, -1, -1], [0, 1, 0, 2, 0, 0]),
    ([1, -1, -1], [1, 0, 0, 0, 0, 1]),
    ([-1, 0, -1], [1, 0, 2, 0, 0, 1]),
    ([0, 1, -1], [0, 0, 0, 0, 0, 0]),
    ([0, -1, 0], [0, 1, 0, 0, 0, 0]),
    ([-1, 0, 0], [1, 0, 0, 1, 1, 0]),
    ([-1, 1, 0], [1, 1, 2, 0, 0, 1]),
    ([-1, -1, 1], [1, 1, 2, 0, 2, 2]),
    ([1, 0, 1], [2, 0, 2, 2, 0, 2]),
    ([-1, 1, 1], [0, 0, 0, 2, 0, 0]),
    ([1, 1, 1], [0, 1, 0, 0, 1, 0]),
    ([0, 0, -1], [1, 1, 0, 2, 0, 1]),
    ([1, 0, 0], [0, 1, 0, 0, 0, 0]),
    ([1, 1, 0], [0, 0, 0, 0, 1, 1]),
    ([0, 1, 1], [1, 1, 2, 0, 1, 2]),
    ([1, 1, -1], [1, 1, 2, 2, 0, 1]),
    ([1, -1, 0], [1, 0, 2, 2, 1, 1]),
    ([0, 1, 0], [1, 1, 0, 1, 1, 0]),
    ([0, -1, 1], [1, 0, 0, 2, 0, 0]),
    ([0, 0, 1], [0, 1, 0, 0, 1, 0]),
    ([0, 0, 0], [1, 0, 1, 0, 1, 1]),
    ([-1, -1, 0], [0, 0, 0, 0, 0, 0]),
    ([-1, 0, 1], [0, 1, 0, 0, 0, 0]),
    ([0, -1, -1], [1, 1, 1, 0, 2, 1]),
    ([-1, 1, -1], [1, 1, 0, 0, 2, 1]),
    ([1, -1, 1], [0, 1, 0, 0, 0, 0]),
    ([1, 0, -1], [0, 1, 0, 0, 2, 0]),
];

pub const DESIGNS_M3: &[Row] = &[
    ([-1, -1, -1], [2, 2, 2, 2, 2, 2]),
    ([1, -1, -1], [2, 2, 2, 2, 1, 2]),
    ([-1, -1, 1], [2, 2, 2, 2, 2, 2]),
    ([1, -1, 1], [2, 2, 2, 2, 1, 2]),
    ([-1, 1, -1], [2, 2, 2, 2, 2, 1]),
    ([1, 1, -1], [2, 2, 2, 2, 1, 1]),
    ([-1, 1, 1], [2, 2, 2, 2, 2, 1]),
    ([1, 1, 1], [2, 2, 2, 2, 1, 1]),
    ([1, 0, -1], [0, 0, 0, 0, 1, 0]),
    ([0, 1, -1], [0, 0, 0, 0, 0, 1]),
    ([1, -1, 0], [0, 0, 0, 0, 1, 0]),
    ([-1, 1, 0], [0, 0, 0, 0, 0, 1]),
    ([1, 1, 0], [0, 0, 0, 0, 1, 1]),
    ([1, 0, 1], [0, 0, 0, 0, 1, 0]),
    ([0, 1, 1], [0, 0, 0, 0, 0, 1]),
];

pub const DESIGNS_M4: &[Row] = &[
    ([1, 1, 1], [1, 1, 1, 1, 2, 1]),
    ([-1, 1, 1], [1, 1, 2, 1, 1, 1]),
    ([-1, 1, -1], [1, 1, 0, 1, 1, 1]),
    ([1, 1, -1], [1, 1, 0, 2, 2, 0]),
    ([1, -1, -1], [1, 1, 1, 1, 1, 1]),
    ([-1, -1, -1], [1, 1, 2, 1, 1, 2]),
    ([-1, -1, 1], [1, 1, 1, 2, 1, 2]),
    ([1, -1, 1], [1, 1, 2, 1, 1, 2]),
    ([0, -1, 0], [1, 0, 1, 2, 1, 1]),
    ([1, 1, 0], [0, 0, 0, 0, 0, 1]),
    ([0, 1, -1], [1, 0, 2, 0, 0, 1]),
    ([0, 0, -1], [0, 0, 0, 0, 2, 0]),
    ([1, 0, 0], [1, 1, 2, 2, 0, 0]),
    ([-1, 1, 0], [1, 1, 0, 0, 0, 0]),
    ([-1, 0, 1], [0, 1, 0, 0, 0, 0]),
    ([0, 1, 1], [0, 0, 0, 0, 0, 0]),
    ([1, 0, -1], [1, 0, 0, 0, 0, 1]),
    ([-1, 0, 0], [0, 0, 0, 0, 2, 1]),
    ([1, -1, 0], [0, 0, 0, 0, 0, 0]),
    ([0, 0, 1], [1, 1, 2, 2, 0, 1]),
    ([1, 0, 1], [0, 0, 0, 0, 0, 0]),
    ([0, -1, -1], [1, 1, 0, 0, 0, 0]),
    ([-1, -1, 0], [0, 1, 0, 0, 0, 0]),
    ([0, -1, 1], [0, 0, 0, 0, 0, 0]),
    ([0, 1, 0], [0, 1, 0, 0, 1, 0]),
    ([-1, 0, -1], [1, 1, 0, 0, 0, 0]),
];

/// Design table of a model (`"M1"`..`"M4"`).
pub fn design_table(model: &str) -> Option<&'static [Row]> {
    match model {
        "M1" => Some(DESIGNS_M1),
        "M2" => Some(DESIGNS_M2),
        "M3" => Some(DESIGNS_M3),
        "M4" => Some(DESIGNS_M4),
        _ => None,
    }
}

/// `(point, reps)` pairs of one published design.
pub fn design_points(model: &str, criterion: &str) -> Option<Vec<([f64; 3], usize)>> {
    let col = CRITERIA.iter().position(|c| *c == criterion)?;
    let rows = design_table(model)?;
    Some(
        rows.iter()
            .filter(|(_, reps)| reps[col] > 0)
            .map(|(x, reps)| ([x[0] as f64, x[1] as f64, x[2] as f64], reps[col] as usize))
            .collect(),
    )
}

/// Published pure-error df, rows D, A, DP, AP, C1, C2 by columns M1..M4.
/// The second compound row is printed with the C1 label in the source table;
/// it belongs to C2.
pub const PEDF: [[usize; 4]; 6] = [
    [8, 1, 8, 0],
    [8, 0, 8, 0],
    [12, 8, 8, 5],
    [12, 7, 8, 4],
    [4, 4, 4, 3],
    [3, 3, 4, 3],
];

/// Published display criterion values, rows M1..M4 by D, A, DP, AP, C1, C2.
/// Compound entries use an unstated scale and are informational only.
pub const CRITERION_VALUES: [[f64; 6]; 4] = [
    [16.00, 16.00, 4.58, 3.37, 8.56, 8.33],
    [6.00, 7.32, 1.55, 1.31, 7.26, 7.29],
    [16.00, 16.00, 4.47, 3.01, 8.58, 8.19],
    [6.72, 7.75, 1.36, 1.01, 7.39, 7.32],
];

/// Missing-run robustness, rows D, A, DP, AP, C1, C2; per model
/// `(BdP, BdN, sigma2_v)`.
pub const MISSING: [[(f64, usize, f64); 4]; 6] = [
    [(0.012, 7, 0.0), (0.004, 4, 0.001), (0.038, 4, 0.0), (0.019, 3, 0.014)],
    [(0.008, 8, 0.0), (0.004, 5, 0.003), (0.038, 4, 0.0), (0.017, 3, 0.014)],
    [(0.097, 4, 0.0), (0.043, 3, 0.007), (0.036, 2, 0.007), (0.116, 1, 0.047)],
    [(0.098, 4, 0.0), (0.045, 3, 0.007), (0.039, 4, 0.0), (0.097, 2, 0.033)],
    [(0.004, 8, 0.001), (0.006, 5, 0.003), (0.015, 4, 0.009), (0.079, 2, 0.027)],
    [(0.003, 8, 0.001), (0.006, 4, 0.002), (0.015, 4, 0.009), (0.099, 3, 0.016)],
];

/// Missing-run probability per model used for the BdP column.
pub const P_MISSING: [f64; 4] = [0.40, 0.20, 0.20, 0.20];

/// Model-change robustness. Rows follow the criterion order A, D, DP, AP,
/// C1, C2; panel (a) columns are designs for M2, M3, M4 evaluated under M1,
/// panel (b) is M4 designs under M2, panel (c) M4 designs under M3.
pub const PSI2_ORDER: [&str; 6] = ["A", "D", "DP", "AP", "C1", "C2"];
pub const PSI2_A: [[f64; 3]; 6] = [
    [0.704, 1.000, 0.755],
    [0.632, 1.000, 0.757],
    [0.597, 0.893, 0.575],
    [0.598, 0.893, 0.499],
    [0.937, 1.000, 0.956],
    [0.955, 0.996, 0.977],
];
pub const PSI2_B: [f64; 6] = [0.960, 0.956, 0.795, 0.638, 0.975, 0.980];
pub const PSI2_C: [f64; 6] = [0.651, 0.666, 0.510, 0.506, 0.946, 0.965];

/// Criterion-change robustness for models M2..M4. Row = optimal design
/// (criterion, model), columns A, D, DP, AP, C1, C2. `None` marks the
/// design's own criterion or an entry that cannot be evaluated.
pub type Psi3Row = (&'static str, &'static str, [Option<f64>; 6]);
pub const PSI3: &[Psi3Row] = &[
    ("A", "M2", [None, Some(0.998), None, None, None, None]),
    ("A", "M3", [None, Some(1.000), Some(1.000), Some(1.000), Some(0.829), Some(0.803)]),
    ("A", "M4", [None, Some(1.000), None, None, None, None]),
    ("D", "M2", [Some(0.984), None, Some(0.017), Some(0.034), Some(0.578), Some(0.642)]),
    ("D", "M3", [Some(1.000), None, Some(1.000), Some(1.000), Some(0.829), Some(0.803)]),
    ("D", "M4", [Some(1.000), None, None, None, None, None]),
    ("DP", "M2", [Some(1.000), Some(0.998), None, Some(1.000), Some(0.872), Some(0.839)]),
    ("DP", "M3", [Some(1.000), Some(1.000), None, Some(1.000), Some(0.829), Some(0.803)]),
    ("DP", "M4", [Some(0.650), Some(0.831), None, Some(0.831), Some(0.908), Some(0.833)]),
    ("AP", "M2", [Some(1.000), Some(0.998), Some(1.000), None, Some(0.872), Some(0.839)]),
    ("AP", "M3", [Some(1.000), Some(1.000), Some(1.000), None, Some(0.829), Some(0.803)]),
    ("AP", "M4", [Some(0.863), Some(0.930), Some(0.962), None, Some(0.972), Some(0.933)]),
    ("C1", "M2", [Some(0.991), Some(1.000), Some(0.628), Some(0.719), None, Some(0.989)]),
    ("C1", "M3", [Some(0.857), Some(0.866), Some(0.503), Some(0.591), None, Some(1.000)]),
    ("C1", "M4", [Some(0.895), Some(0.951), Some(0.782), Some(0.889), None, Some(0.977)]),
    ("C2", "M2", [Some(0.960), Some(0.987), Some(0.552), Some(0.726), Some(0.995), None]),
    ("C2", "M3", [Some(0.857), Some(0.866), Some(0.503), Some(0.591), Some(1.000), None]),
    ("C2", "M4", [Some(0.960), Some(0.987), Some(0.552), Some(0.726), Some(0.995), None]),
];
