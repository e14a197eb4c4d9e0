from .clireport import main

main()
