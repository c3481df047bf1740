#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bifactor/bigraph.hpp"

namespace bifactor {

// An assignment of colours 0..m-1 to the edges of a host graph.  Edges start
// uncoloured (-1); each edge is coloured at most once.
class Factorisation {
  public:
    Factorisation(BiGraph host, int m);

    const BiGraph& host() const { return host_; }
    int m() const { return m_; }
    int colour_of(int edge) const { return colour_.at(edge); }
    bool is_coloured(int edge) const { return colour_.at(edge) >= 0; }
    int coloured_count() const { return coloured_; }
    bool is_complete() const { return coloured_ == host_.edge_count(); }

    void set_colour(int edge, int c);

    // Edges of colour c at vertex v (global index).
    int class_degree(int v, int c) const;
    // Number of edges per colour class.
    std::vector<int> class_sizes() const;
    // The colour class as a standalone graph on the same vertex set.
    BiGraph class_graph(int c) const;
    // All classes at once (single pass over the edges).
    std::vector<BiGraph> class_graphs() const;

    // Partition check for finished outputs: every edge coloured, every class
    // within the degree band at every vertex.
    CheckResult validate_regular(const DegreeBand& band) const;

  private:
    BiGraph host_;
    int m_;
    std::vector<int> colour_;
    int coloured_ = 0;
};

// Text form: header "n m_edges", then "u v c" per edge, canonically sorted.
void write_factorisation(std::ostream& out, const Factorisation& F);
void write_factorisation_file(const std::string& path, const Factorisation& F);
// m < 0 derives the palette as (largest colour + 1).
Factorisation read_factorisation(std::istream& in, int m = -1);
Factorisation read_factorisation_file(const std::string& path, int m = -1);

}  // namespace bifactor
