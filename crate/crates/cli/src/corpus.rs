//! Graph files shipped under `graphs/`, embedded for the self-test.

pub const CORPUS: &[(&str, &str)] = &[
    ("chain_excluded", include_str!("../../../graphs/chain_excluded.graph")),
    ("ex1_1_nested", include_str!("../../../graphs/ex1_1_nested.graph")),
    ("ex1_1_tadpole", include_str!("../../../graphs/ex1_1_tadpole.graph")),
    ("ex2_9_genus1", include_str!("../../../graphs/ex2_9_genus1.graph")),
    ("maximal_r01", include_str!("../../../graphs/maximal_r01.graph")),
    ("maximal_r02", include_str!("../../../graphs/maximal_r02.graph")),
    ("maximal_r03", include_str!("../../../graphs/maximal_r03.graph")),
    ("maximal_r04", include_str!("../../../graphs/maximal_r04.graph")),
    ("maximal_r05", include_str!("../../../graphs/maximal_r05.graph")),
    ("maximal_r06", include_str!("../../../graphs/maximal_r06.graph")),
    ("maximal_r07", include_str!("../../../graphs/maximal_r07.graph")),
    ("maximal_r08", include_str!("../../../graphs/maximal_r08.graph")),
    ("maximal_r09", include_str!("../../../graphs/maximal_r09.graph")),
    ("maximal_r10", include_str!("../../../graphs/maximal_r10.graph")),
    ("maximal_r11", include_str!("../../../graphs/maximal_r11.graph")),
    ("maximal_r12", include_str!("../../../graphs/maximal_r12.graph")),
    ("maximal_r13", include_str!("../../../graphs/maximal_r13.graph")),
    ("maximal_r13m", include_str!("../../../graphs/maximal_r13m.graph")),
    ("maximal_r14", include_str!("../../../graphs/maximal_r14.graph")),
    ("maximal_r14m", include_str!("../../../graphs/maximal_r14m.graph")),
    ("maximal_r15", include_str!("../../../graphs/maximal_r15.graph")),
    ("maximal_r16", include_str!("../../../graphs/maximal_r16.graph")),
    ("maximal_r17", include_str!("../../../graphs/maximal_r17.graph")),
    ("maximal_r18", include_str!("../../../graphs/maximal_r18.graph")),
    ("maximal_r19", include_str!("../../../graphs/maximal_r19.graph")),
    ("maximal_r20", include_str!("../../../graphs/maximal_r20.graph")),
    ("maximal_r21", include_str!("../../../graphs/maximal_r21.graph")),
    ("tadpole_on_propagator", include_str!("../../../graphs/tadpole_on_propagator.graph")),
    ("three_point_bubble", include_str!("../../../graphs/three_point_bubble.graph")),
    ("three_point_four_loop", include_str!("../../../graphs/three_point_four_loop.graph")),
];
