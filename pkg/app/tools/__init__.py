# makes app a package
