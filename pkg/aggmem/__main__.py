from aggmem.cli import main

main()
