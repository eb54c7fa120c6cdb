//! Sign and normalization conventions fixed across the crate.
//!
//! Everything is in one complex dimension with chart coordinate `z`.

/// `(name, statement)` pairs, copied verbatim into every report.
pub const CONVENTIONS: &[(&str, &str)] = &[
    ("hermitian_metric", "|s|^2 = e^{-2 phi}, R^L = 2 d dbar phi"),
    (
        "kahler_form",
        "omega = (i/2pi) R^L, omega_11 = phi_{z zbar} / pi, h^11 = 1/omega_11",
    ),
    ("volume", "dv_M = Theta_11 * 2 dx dy"),
    ("curvature_operator", "Rdot^L = 2 phi_{z zbar} / Theta_11"),
    ("laplacian", "Delta_omega = -2 h^11 d_z d_zbar (nonnegative)"),
    (
        "ricci",
        "Ric_omega = (log omega_11)_{z zbar} dz ^ dzbar, R^TM = -Ric_omega",
    ),
    (
        "determinant_curvature",
        "R^det_Theta = (log Theta_11)_{z zbar} dz ^ dzbar",
    ),
    ("pairing", "<a|b>_omega = a conj(b) (h^11)^(number of covectors)"),
    (
        "dbar_d",
        "dbar d f = -f_{z zbar} dz ^ dzbar, dbar g ^ d f = -f_z g_zbar dz ^ dzbar",
    ),
    (
        "star_product",
        "C_1(f, g) = -f_z g_zbar / (2 phi_{z zbar}), so T_z T_zbar = T_{|z|^2} - 1/k on Bargmann space",
    ),
    (
        "poisson",
        "{f, g} = i (f_z g_zbar - f_zbar g_z) / (2 phi_{z zbar}), so C_1(f,g) - C_1(g,f) = i {f, g}",
    ),
    (
        "stationary_phase_measure",
        "Lebesgue dx; the Kahler recursion carries its own 2^n",
    ),
    (
        "distance",
        "dist is the geodesic distance of the base metric 2 Theta_11 |dz|^2",
    ),
    (
        "sqrt_branch",
        "det(k F''/2 pi i)^{-1/2} = product of principal square roots over eigenvalues",
    ),
];

/// Identifier of the convention set, bumped whenever a statement changes.
pub const CONVENTIONS_VERSION: u32 = 1;
