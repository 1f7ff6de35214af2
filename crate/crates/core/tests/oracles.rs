mod support;

#[test]
fn jets_match_symbolic_differentiation() {
    let summary = support::derivative_oracle(50, 6, 0x5eed).unwrap();
    eprintln!("{summary}");
}

#[test]
fn lipschitz_bound_on_random_pairs() {
    support::lipschitz_pairs(200, 7).unwrap();
}

#[test]
fn divergence_bound_against_closed_forms() {
    support::divergence_dominance(11).unwrap();
}

#[test]
fn taylor_error_bound_against_closed_forms() {
    support::taylor_error_dominance(20, 13).unwrap();
}

#[test]
fn fixed_point_against_bisection() {
    support::fixed_point_cases(100, 17).unwrap();
}
