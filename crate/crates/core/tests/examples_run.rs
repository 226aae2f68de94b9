// Every example in quick mode.

macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }

        #[test]
        fn $name() {
            $name::run_example(true).unwrap();
        }
    };
}

example!(return_probabilities);
example!(greens_functions);
example!(dgff_covariance);
example!(bridge_law);
example!(loop_soup);
example!(route_agreement);
example!(cluster_geometry);
example!(glued_chains);
example!(one_arm_exponent);
example!(werner_gap);
