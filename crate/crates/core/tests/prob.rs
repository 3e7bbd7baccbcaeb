use parrep::prob::{Event, FiniteDistribution, Variable};
use proptest::prelude::*;

fn vars(cards: &[usize]) -> Vec<Variable> {
    cards.iter().enumerate().map(|(i, &c)| Variable::new(format!("V{i}"), c)).collect()
}

fn table() -> impl Strategy<Value = FiniteDistribution> {
    prop::collection::vec(1usize..4, 1..4).prop_flat_map(|cards| {
        let size: usize = cards.iter().product();
        prop::collection::vec(0.0f64..1.0, size).prop_filter_map("nonzero mass", move |w| {
            if w.iter().sum::<f64>() < 1e-3 {
                return None;
            }
            FiniteDistribution::from_unnormalized(vars(&cards), w).ok()
        })
    })
}

#[test]
fn rejects_negative_and_unnormalized() {
    assert!(FiniteDistribution::new(vars(&[2]), vec![0.5, 0.6]).is_err());
    assert!(FiniteDistribution::new(vars(&[2]), vec![1.5, -0.5]).is_err());
    assert!(FiniteDistribution::new(vars(&[2]), vec![1.0]).is_err());
}

#[test]
fn conditioning_on_null_event_fails() {
    let d = FiniteDistribution::new(vars(&[2]), vec![1.0, 0.0]).unwrap();
    let e = Event::fixing(&d, &[("V0", 1)]).unwrap();
    assert!(d.condition(&e).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn index_and_assignment_are_inverse(d in table()) {
        for k in 0..d.len() {
            prop_assert_eq!(d.index(&d.assignment(k)), k);
        }
    }

    #[test]
    fn marginal_matches_direct_sum(d in table()) {
        let first = d.variables()[0].name.clone();
        let m = d.marginal(&[first.as_str()]).unwrap();
        let mut direct = vec![0.0; d.cards()[0]];
        d.for_each(|a, w| direct[a[0]] += w);
        for (x, w) in direct.iter().enumerate() {
            prop_assert!((m.weight(&[x]) - w).abs() < 1e-12);
        }
    }

    #[test]
    fn conditioning_is_renormalized_restriction(d in table(), pick in any::<u64>()) {
        let e = Event::from_fn(&d, |a| (a.iter().sum::<usize>() as u64 + pick) % 2 == 0);
        let pe = d.prob(&e).unwrap();
        prop_assume!(pe > 1e-6);
        let c = d.condition(&e).unwrap();
        for k in 0..d.len() {
            let expect = if e.contains(k) { d.weights()[k] / pe } else { 0.0 };
            prop_assert!((c.weights()[k] - expect).abs() < 1e-9);
        }
        let f = Event::from_fn(&d, |a| a[0] == 0);
        let both = e.and(&f).unwrap();
        prop_assert!((d.prob(&both).unwrap() - c.prob(&f).unwrap() * pe).abs() < 1e-12);
    }

    #[test]
    fn tv_is_a_metric_on_tables(p in table(), seed in any::<u64>()) {
        let n = p.len();
        let w: Vec<f64> = (0..n).map(|k| ((seed >> (k % 64)) & 7) as f64 + 0.5).collect();
        let q = FiniteDistribution::from_unnormalized(p.variables().to_vec(), w).unwrap();
        let t = p.tv_distance(&q).unwrap();
        prop_assert!((0.0..=1.0).contains(&t));
        prop_assert!((t - q.tv_distance(&p).unwrap()).abs() < 1e-15);
        prop_assert!(p.tv_distance(&p).unwrap() == 0.0);
        let direct: f64 = 0.5 * p.weights().iter().zip(q.weights()).map(|(a, b)| (a - b).abs()).sum::<f64>();
        prop_assert!((t - direct).abs() < 1e-12);
    }

    #[test]
    fn product_extend_keeps_marginal_and_conditional(joint in table(), seed in any::<u64>()) {
        prop_assume!(joint.variables().len() >= 2);
        let first = joint.variables()[0].name.clone();
        let jm = joint.marginal(&[first.as_str()]).unwrap();
        prop_assume!(jm.weights().iter().all(|&w| w > 1e-6));
        let k = jm.len();
        let w: Vec<f64> = (0..k).map(|x| ((seed >> (3 * x)) & 7) as f64 + 1.0).collect();
        let px = FiniteDistribution::from_unnormalized(jm.variables().to_vec(), w).unwrap();
        let ext = px.product_extend(&joint).unwrap();
        let back = ext.marginal(&[first.as_str()]).unwrap();
        for x in 0..k {
            prop_assert!((back.weights()[x] - px.weights()[x]).abs() < 1e-12);
        }
        for i in 0..ext.len() {
            let a = ext.assignment(i);
            let cond_new = ext.weights()[i] / px.weights()[a[0]];
            let cond_old = joint.weight(&a) / jm.weights()[a[0]];
            prop_assert!((cond_new - cond_old).abs() < 1e-9);
        }
    }
}
