//! Example configs compiled into the binary for `reproduce`.

/// Table I servers and the three-server policy `[M1,G,U](5,10,20)`.
pub const TABLE1: &str = include_str!("../examples/table1.json");
/// Scripted two-server replay.
pub const FIG2: &str = include_str!("../examples/fig2.json");
/// pmf comparison policies with dual thresholds `(10, 20)`.
pub const FIG3_TEXT: &str = include_str!("../examples/fig3_text.json");
/// pmf comparison policies with dual thresholds `(20, 50)`.
pub const FIG3_CAPTION: &str = include_str!("../examples/fig3_caption.json");
/// `[M1,G]` cost sweeps for `tau_1` in {8, 16, 32, 64}.
pub const FIG4: &str = include_str!("../examples/fig4.json");
/// Pool `{M1, G, U}` with `c_U = 500`.
pub const SCENARIO1: &str = include_str!("../examples/scenario1.json");
/// Pool `{M2, G, U}` with `c_U = 1500`.
pub const SCENARIO2: &str = include_str!("../examples/scenario2.json");

pub const ALL: [(&str, &str); 7] = [
    ("table1.json", TABLE1),
    ("fig2.json", FIG2),
    ("fig3_text.json", FIG3_TEXT),
    ("fig3_caption.json", FIG3_CAPTION),
    ("fig4.json", FIG4),
    ("scenario1.json", SCENARIO1),
    ("scenario2.json", SCENARIO2),
];
