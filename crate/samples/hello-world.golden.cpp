#include "iostream"
#include "cstdio"
#include "string"
#include "thread"
#include "chrono"
using namespace std ;

int main()
{
// The First Step
cout << "Hello World" << "\n" ;
std::this_thread::sleep_for(std::chrono::seconds(3)) ;
return 0 ;
}
