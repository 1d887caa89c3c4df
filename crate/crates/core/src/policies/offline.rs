use crate::error::Result;
use crate::instance::{ExampleOneLayout, Instance};
use crate::simulator::Arrival;

/// Clairvoyant allocation on the lower-bound family: every rare type that
/// arrived is served once on its dedicated supply, then the common type takes
/// whatever supply is left. Returns served counts per demand type.
pub fn offline_rare_first(inst: &Instance, arrivals: &[Arrival]) -> Result<Vec<u64>> {
    let layout = ExampleOneLayout::detect(inst)?;
    offline_rare_first_with(&layout, arrivals)
}

pub(crate) fn offline_rare_first_with(
    layout: &ExampleOneLayout,
    arrivals: &[Arrival],
) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; layout.n + 1];
    for a in arrivals {
        counts[a.demand] += 1;
    }
    let mut served = vec![0u64; layout.n + 1];
    let mut free = layout.n as u64;
    for (j, &a) in counts.iter().enumerate() {
        if j != layout.common && a > 0 {
            served[j] = 1;
            free -= 1;
        }
    }
    served[layout.common] = counts[layout.common].min(free);
    Ok(served)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_lower_bound_instance;

    fn at(demand: usize, time: f64) -> Arrival {
        Arrival { demand, time }
    }

    #[test]
    fn rare_twice_and_common_once() {
        let inst = generate_lower_bound_instance(2).unwrap();
        let served = offline_rare_first(&inst, &[at(1, 0.1), at(0, 0.2), at(1, 0.3)]).unwrap();
        assert_eq!(served, vec![1, 1, 0]);
    }

    #[test]
    fn nothing_arrives() {
        let inst = generate_lower_bound_instance(3).unwrap();
        assert_eq!(offline_rare_first(&inst, &[]).unwrap(), vec![0; 4]);
    }

    #[test]
    fn common_fills_the_rest() {
        let inst = generate_lower_bound_instance(3).unwrap();
        let arrivals: Vec<Arrival> = (0..5)
            .map(|k| at(0, k as f64 / 10.0))
            .chain([at(2, 0.9)])
            .collect();
        assert_eq!(
            offline_rare_first(&inst, &arrivals).unwrap(),
            vec![2, 0, 1, 0]
        );
    }

    #[test]
    fn wrong_family() {
        let inst = crate::instance::tests::two_by_two();
        assert!(offline_rare_first(&inst, &[]).is_err());
    }
}
