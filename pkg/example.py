import json
import logging
import os
import time

from hierassoclib import *

def main():
    if os.path.exists("config.json"):
        configData = json.load(open("config.json","r"))
        scale = configData.get("scale", 14)
        totalEdges = configData.get("total_edges", 200000)
        batchSize = configData.get("batch_size", 10000)
    else:
        scale = 14
        totalEdges = 200000
        batchSize = 10000

    #Uncomment this to enable logging (every cascade between layers is logged):
    #logging.basicConfig(level=logging.DEBUG)

    #A small graph of IP addresses, one entry per connection.
    graph = AssocArray.from_triples(
        ["1.1.1.1", "1.1.1.1", "2.2.2.2", "4.4.4.4", "3.3.3.3"],
        ["2.2.2.2", "3.3.3.3", "1.1.1.1", "1.1.1.1", "4.4.4.4"],
        [1, 1, 1, 1, 1])
    print(graph)

    #Neighbors of 1.1.1.1: multiply an identity selector into the adjacency array.
    selector = AssocArray.identity_from_keys(["1.1.1.1"], ["1.1.1.1"])
    print("Out-neighbors of 1.1.1.1: " + str((selector @ graph).col_keys.tolist()))
    print("In-neighbors of 1.1.1.1: " + str((selector @ graph.T).col_keys.tolist()))

    #The same query, as a plain extraction.
    print(graph["1.1.1.1", :])

    #Degrees are row and column sums.
    print("Out-degrees: " + str(graph.reduce_rows("out").to_dict()))
    print("In-degrees: " + str(graph.reduce_cols("in").to_dict()))

    #Shortest two-hop paths with min_plus: the weights are distances.
    distances = AssocArray.from_dict({("a", "b"): 2, ("b", "c"): 3, ("a", "c"): 9, ("c", "d"): 1}, "min_plus")
    print("Two-hop distances: " + str((distances @ distances).to_dict()))

    #Now stream an R-MAT graph through a hierarchical array, and through a plain sum for comparison.
    rmatConfig = RmatConfig(scale=scale, total_edges=totalEdges, batch_size=batchSize)
    hier = HierArray(cuts=[2**10, 2**13])
    flat = AssocArray.empty()
    hierSeconds = 0.0
    flatSeconds = 0.0
    for batch in rmat_stream(rmatConfig):
        update = batch.to_assoc()

        startTime = time.perf_counter()
        hier.update(update)
        hierSeconds += time.perf_counter() - startTime

        startTime = time.perf_counter()
        flat = flat + update
        flatSeconds += time.perf_counter() - startTime
        print(f"Batch {batch.index}: layers hold {[layer.nnz for layer in hier.layers]}")

    print(f"Hierarchical: {totalEdges / hierSeconds:.0f} updates/s, plain sum: {totalEdges / flatSeconds:.0f} updates/s")
    print(f"Cascades per layer: {hier.stats.cascades}")

    #flush() only reads, so the hierarchy can keep absorbing updates afterwards.
    flushed = hier.flush()
    print("Flush matches the plain sum: " + str(flushed == flat))

    #Query a single vertex without flushing everything.
    firstVertex = flushed.row_keys[0]
    print(f"Edges out of {firstVertex}: {hier.extract([firstVertex], None).nnz}")

    stats = degree_stats(rmat_stream(rmatConfig))
    print(f"{stats.distinct_vertices} vertices, mean degree {stats.mean_degree:.2f}, max degree {stats.max_degree}")

    #Save and reload the result as TSV triples.
    write_triples(flushed, "example_graph.tsv")
    reloaded = read_triples("example_graph.tsv")
    print("Reloaded array matches: " + str(reloaded == flushed))
    os.remove("example_graph.tsv")

    #The same kind of measurement, with metrics, via the benchmark harness.
    report = run_single(BenchConfig(rmat=rmatConfig, cuts="few-wide"))
    result = report.instances[0]
    print(f"Benchmark: {result.final_cum_rate:.0f} updates/s, verified: {report.verified}")


if __name__ == "__main__":
    main()
