from carlock.cli import main

main()
