// Generates a small gridded city and prints it in the cityv1 text format,
// then lists the turning options at one interior intersection.

#include <cstdio>
#include <iostream>

#include "urbannav/citygen.hpp"

int main() {
    using namespace urbannav;

    CityGenParams params;
    params.side_m = 600.0;
    params.block_m = 150.0;
    params.dead_end_fraction = 0.1;
    params.one_way_fraction = 0.2;
    params.landmark_density_per_km2 = 10.0;
    params.seed = 7;

    const CityMap map = generate_city(params);
    write_city(std::cout, map);

    const int node = map.node_id(2, 2);
    std::printf("# options at node %d approaching eastbound:\n", node);
    for (const IntersectionOption& opt : intersection_options(map, node, 0.0)) {
        std::printf("#   option %d: theta_plus=%.1f deg via segment %d\n", opt.index,
                    rad_to_deg(opt.theta_plus), opt.exit_segment_id);
    }
    return 0;
}
