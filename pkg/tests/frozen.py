"""Reference values printed by ``oracles.py`` (mpmath, 50 digits), frozen here."""

FROZEN = {
    'H_quarter': 0.81127812445913286,
    'mi_two_thirds': 0.081704165945510485,
    'deficit_b025_w8': 1.5097750043269371,
    'iid_b025_111': 0.015625,
    'holevo_point_w1': 0.31127812445913286,
    'holevo_b025_w2': 0.094399196819696282,
    'info_delta_1': 0.081704165945510485,
    'info_delta_m05': 0.081704165945510485,
    'lower_pos_1': 0.018518518518518519,
    'lower_neg_m05': 0.027777777777777778,
    'delta_max_1e-6': 0.0023575956293938368,
    'sqrt_8ln2': 2.3548200450309494,
    'floor_uniform4_01': 1.6487461238750716,
    'leading_k1': 0.005,
    'leading_k128': 0.00036374577874869888,
    'exact_k128': 0.00021653640671976092,
    'exact_k1': 0.0057628934401897284,
    'vacuous_epsA_k128': 0.12451314554525799,
    'eta_k2': 0.0036127730060958532,
    'guess_w8_b025': 0.9375,
    'guess_w8_b025_alt': 0.5625,
    'game_w10_b03_info': 0.025930442062581068,
    'ir_sifted_error': 0.25,
}
