#include <iostream>

#include "mail/harness/acceptance.hpp"

// usage: acceptance [mail-lab binary]
int main(int argc, char** argv)
{
   mail::acceptance::Options opts;
   opts.default_config = MAIL_DEFAULT_CONFIG;
   if (argc > 1) opts.mail_lab = argv[1];
   opts.scratch = std::filesystem::temp_directory_path() / "mail-acceptance";
   const int failed = mail::acceptance::run_battery(opts, std::cout);
   std::cout << failed << " of 9 criteria failed\n";
   return failed ? 1 : 0;
}
