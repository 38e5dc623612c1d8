from metric_sparsity.cli import main

main()
