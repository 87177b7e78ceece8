SCENARIOS = {
    # Annulus: positive disc inside a negative ring, two mirrored quadratic bands.
    # Curvature/offset are chosen so every expensive band falls in the negative ring.
    "annulus": {
        "kind": "annulus",
        "inner_radius": 2.0,
        "gap_radius": 3.0,
        "outer_radius": 5.0,
        "angular_bins": 64,
        "radial_bins": 24,
        "cost_scale": 2.0,
        "class_balance": 0.5,
        "curvature": 0.1,
        "offset": 4.0,
        "rotations": [],
    },
    # Same world with the curves as drawn in the usual illustration (y = ±(x²/2 - 1)).
    "annulus-figure": {
        "kind": "annulus",
        "curvature": 0.5,
        "offset": 1.0,
    },
    # Two feature blocks carrying the same signal; f_A reads block A, f_B block B.
    "redundant": {
        "kind": "redundant",
        "block_values": [0.0, 1.0, 2.0, 3.0],
        "cost_scale": [1.0, 1.0],
        "threshold": 2.0,
        "class_balance": 0.5,
        "p_pos": [0.0, 0.2, 0.4, 0.4],
        "p_neg": [0.4, 0.4, 0.2, 0.0],
    },
    # Block B is nearly free to move, so f_B is gamed by everyone.
    "redundant-free-b": {
        "kind": "redundant",
        "cost_scale": [1.0, 0.1],
    },
}
