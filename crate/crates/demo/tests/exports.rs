use dynrepset_demo::{circuit_sum, context_summary, random_graph, solve_kpath};

#[test]
fn random_graph_round_trips_through_solver() {
    let text = random_graph(9, 4, 2, 9, 3);
    let out = solve_kpath(&text, 0).map_err(|_| ()).unwrap();
    assert!(out.lines().nth(1).unwrap().ends_with(" match"), "{out}");
}

#[test]
fn circuit_sum_matches_expansion() {
    let text = "p circuit 5 3 1 2\ng 1 var 1\ng 2 var 2\ng 3 var 3\ng 4 mul 1 2\ng 5 add 4 3\n";
    let out = circuit_sum(text, 2, false).map_err(|_| ()).unwrap();
    assert_eq!(out, "answer 0\noracle 0 match\n");
}

#[test]
fn summary_reports_vector_length() {
    let out = context_summary(8, 4).map_err(|_| ()).unwrap();
    assert!(out.contains("vector length r 10890"), "{out}");
}
